//! Deterministic limits of the jump processes in [`crate::markov`], an ODE
//! integrator that respects the state space, and Lyapunov moment checks.

mod drift;
mod integrate;
mod lyapunov;

pub use drift::{
    drift, drift_attachment, drift_growth, drift_into, drift_kth_order, drift_multiclass,
    drift_replicator, drift_smoluchowski, DriftSpec,
};
pub use integrate::{
    flow, integrate, integrate_final, Integration, IntegrationStats, Stepper,
};
pub use lyapunov::{lyapunov_check, LyapunovMode, LyapunovReport, LyapunovWeight};
