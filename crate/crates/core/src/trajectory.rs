use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Time series of states and the controls in force, shared by the
/// stochastic simulator and the ODE integrator.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, state: Vec<f64>, control: Vec<f64>) {
        self.times.push(t);
        self.states.push(state);
        self.controls.push(control);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    pub fn final_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Checks the structural invariants: starts at 0, strictly increasing
    /// times, matching lengths.
    pub fn check(&self) -> Result<()> {
        if self.states.len() != self.times.len() || self.controls.len() != self.times.len() {
            return Err(Error::input("trajectory columns have different lengths"));
        }
        if let Some(t0) = self.times.first() {
            if *t0 != 0.0 {
                return Err(Error::input("trajectory must start at t = 0"));
            }
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::input("trajectory times are not strictly increasing"));
        }
        Ok(())
    }
}
