//! The principal's decision layer: instantaneous best response, Bellman
//! (Shapley) iteration on the kinetic limit, discounted programs, the
//! rate-controlled variant where the principal steers `b' = u`, and a
//! Monte-Carlo Bellman operator on the finite-population chain.

mod best_response;
mod shapley;
mod tables;

pub use best_response::{best_response, maximize_on_interval};
pub use shapley::{
    control_value_iterate, discounted_value, shapley_apply, shapley_apply_markov, value_iterate,
    ControlPlan, DiscountedPlan, MarkovSweep, Plan, RunningReward, ShapleyOptions, Sweep,
};
pub use tables::{PolicyTable, ValueTable, MAX_STRATEGIES};
