//! Domain types shared by the simulation, kinetic and planning layers.

mod classes;
pub(crate) mod dynamics;
mod growth;
mod kernel;
mod payoff;
mod principal;
mod state;

pub use classes::{ClassStructure, CommMode};
pub use dynamics::{Dynamics, GroupRate};
pub use growth::{GrowthChannel, GrowthCoefficients, GrowthTerm, RateLaw};
pub use kernel::{
    coalition_rates, Attachment, Coefficients, ControlRate, KernelSpec, RateKernel, SizePayoff,
};
pub use payoff::{
    control_component, ControlAffine, Detection, Fine, Orientation, PayoffKind, PayoffModel,
    TabularPayoff,
};
pub use principal::{ControlBox, PolicySchedule, PrincipalMode, PrincipalModel, PrincipalReward};
pub use state::{OccupationState, SimplexState, TOL_POS, TOL_SUM};
