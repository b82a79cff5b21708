//! Pressure-resistance evolutionary games between a principal and a crowd of
//! small players.
//!
//! The crate covers both sides of the law of large numbers:
//!
//! * [`markov`] builds the finite-population jump processes (pairwise
//!   imitation, group interaction, multi-class populations, birth/death
//!   growth, coalition merging/splitting, preferential attachment) and
//!   simulates them exactly.
//! * [`kinetic`] provides their deterministic limits and an ODE integrator
//!   that keeps states on the simplex.
//!
//! On top of that, [`equilibria`] locates rest points and certifies
//! approximate Nash equilibria, [`principal`] solves the major player's
//! planning problems, and [`harness`] measures convergence rates.
//!
//! The crate is `no_std` (with `alloc`). Enable the `serde` feature for
//! serializable reports and tables.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod equilibria;
pub mod error;
pub mod exec;
pub mod grid;
pub mod harness;
pub mod kinetic;
pub mod markov;
pub mod math;
pub mod model;
pub mod principal;
pub mod rng;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{
    ClassStructure, CommMode, ControlBox, Dynamics, KernelSpec, OccupationState, PayoffModel,
    PrincipalModel, SimplexState,
};
pub use trajectory::Trajectory;
