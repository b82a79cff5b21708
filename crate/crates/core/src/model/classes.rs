use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::state::TOL_SUM;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommMode {
    /// Classes interact only through the principal.
    NoCommunication,
    /// Agents copy across classes and observe the whole distribution.
    FullCommunication,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassStructure {
    pub comm_mode: CommMode,
    pub class_fractions: Vec<f64>,
    pub per_class_kappa: Vec<f64>,
}

impl ClassStructure {
    pub fn new(comm_mode: CommMode, class_fractions: Vec<f64>, per_class_kappa: Vec<f64>) -> Result<Self> {
        let c = ClassStructure {
            comm_mode,
            class_fractions,
            per_class_kappa,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.class_fractions.len();
        if n == 0 {
            return Err(Error::config("at least one class is required"));
        }
        if self.per_class_kappa.len() != n {
            return Err(Error::config(format!(
                "{} class fractions but {} class rates",
                n,
                self.per_class_kappa.len()
            )));
        }
        if self.class_fractions.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::config("class fractions must be non-negative"));
        }
        let s: f64 = self.class_fractions.iter().sum();
        if (s - 1.0).abs() > TOL_SUM {
            return Err(Error::config(format!(
                "class fractions must sum to 1 (got {s})"
            )));
        }
        if self.per_class_kappa.iter().any(|k| !(*k > 0.0)) {
            return Err(Error::config("class interaction rates must be positive"));
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.class_fractions.len()
    }
}
