//! Finite-population jump processes and their exact simulation.
//!
//! A builder materializes the outgoing transitions of the current state (one
//! row of the Q-matrix) as a [`TransitionList`]; [`simulate`] draws
//! exponential holding times from the total rate and picks the next jump
//! proportionally to the entry rates.

mod build;
pub(crate) use build::{best_member, for_each_subset};
mod ensemble;
mod simulate;
mod transitions;

pub use build::{
    build_attachment, build_coalition, build_growth, build_kth_order, build_multiclass,
    build_pairwise, discrete_attachment_expectation, discrete_attachment_step, transitions,
};
pub use ensemble::{ensemble_mean, EnsembleStats};
pub use simulate::{simulate, simulate_final, ChainEnd, ChainPath};
pub use transitions::{Transition, TransitionList};
