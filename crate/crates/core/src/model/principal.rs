use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::grid::linspace;
use crate::model::payoff::PayoffModel;
use crate::principal::{best_response, PolicyTable};

/// Closed box of admissible controls, one interval per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlBox {
    bounds: Vec<(f64, f64)>,
}

impl ControlBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (k, (lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::config(format!(
                    "control interval {k} is [{lo}, {hi}], expected finite lo <= hi"
                )));
            }
        }
        Ok(ControlBox { bounds })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(alloc::vec![(lo, hi)])
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, b: &[f64]) -> bool {
        b.len() == self.dim()
            && b
                .iter()
                .zip(&self.bounds)
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn clamp(&self, b: &mut [f64]) {
        for (v, (lo, hi)) in b.iter_mut().zip(&self.bounds) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    /// Per-axis evenly spaced points including both endpoints.
    pub fn axes(&self, points: usize) -> Vec<Vec<f64>> {
        self.bounds
            .iter()
            .map(|(lo, hi)| {
                if lo == hi {
                    alloc::vec![*lo]
                } else {
                    linspace(*lo, *hi, points)
                }
            })
            .collect()
    }

    /// Tensor-product grid of controls in row-major order.
    pub fn grid(&self, points: usize) -> Vec<Vec<f64>> {
        let axes = self.axes(points);
        let total: usize = axes.iter().map(Vec::len).product();
        (0..total)
            .map(|mut flat| {
                let mut b = alloc::vec![0.0; axes.len()];
                for k in (0..axes.len()).rev() {
                    b[k] = axes[k][flat % axes[k].len()];
                    flat /= axes[k].len();
                }
                b
            })
            .collect()
    }
}

pub type RewardFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// The principal's running reward `B(x, b)`; always maximized.
#[derive(Clone)]
pub enum PrincipalReward {
    Constant(f64),
    /// `sum_j w_j x_j + sum_k (l_k b_k - q_k b_k^2) + sum_{j,k} c_jk x_j b_k`.
    Quadratic {
        x_weights: Vec<f64>,
        b_linear: Vec<f64>,
        b_quadratic: Vec<f64>,
        cross: Vec<f64>,
    },
    /// Negated counterterrorism cost of the given terror payoff.
    TerrorCost(PayoffModel),
    Custom(Arc<RewardFn>),
}

impl fmt::Debug for PrincipalReward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrincipalReward::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            PrincipalReward::Quadratic { .. } => f.write_str("Quadratic{..}"),
            PrincipalReward::TerrorCost(_) => f.write_str("TerrorCost(..)"),
            PrincipalReward::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PrincipalReward {
    pub fn custom(f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        PrincipalReward::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64], b: &[f64]) -> Result<f64> {
        let v = match self {
            PrincipalReward::Constant(c) => *c,
            PrincipalReward::Quadratic {
                x_weights,
                b_linear,
                b_quadratic,
                cross,
            } => {
                let mut v: f64 = x_weights.iter().zip(x).map(|(w, xj)| w * xj).sum();
                for (k, bk) in b.iter().enumerate() {
                    v += b_linear.get(k).copied().unwrap_or(0.0) * bk;
                    v -= b_quadratic.get(k).copied().unwrap_or(0.0) * bk * bk;
                }
                if !cross.is_empty() {
                    let r = b.len();
                    for (j, xj) in x.iter().enumerate() {
                        for (k, bk) in b.iter().enumerate() {
                            v += cross.get(j * r + k).copied().unwrap_or(0.0) * xj * bk;
                        }
                    }
                }
                v
            }
            PrincipalReward::TerrorCost(p) => -p.terror_principal_cost(x, b)?,
            PrincipalReward::Custom(f) => f(x, b),
        };
        if !v.is_finite() {
            return Err(Error::numerical(
                format!("principal reward is {v} at control {b:?}"),
                x,
            ));
        }
        Ok(v)
    }
}

/// Feedback policies applied on consecutive intervals of length `tau`.
#[derive(Debug, Clone)]
pub struct PolicySchedule {
    pub tau: f64,
    pub stages: Vec<PolicyTable>,
}

#[derive(Debug, Clone)]
pub enum PrincipalMode {
    Fixed(Vec<f64>),
    BestResponse,
    Policy(PolicySchedule),
}

#[derive(Debug, Clone)]
pub struct PrincipalModel {
    pub reward: PrincipalReward,
    pub control_box: ControlBox,
    pub mode: PrincipalMode,
}

impl PrincipalModel {
    pub fn new(reward: PrincipalReward, control_box: ControlBox, mode: PrincipalMode) -> Result<Self> {
        if let PrincipalMode::Fixed(b) = &mode {
            if !control_box.contains(b) {
                return Err(Error::config(format!(
                    "fixed control {b:?} lies outside the control box"
                )));
            }
        }
        if let PrincipalMode::Policy(s) = &mode {
            if !(s.tau > 0.0) || s.stages.is_empty() {
                return Err(Error::config("policy schedule needs tau > 0 and at least one stage"));
            }
        }
        Ok(PrincipalModel {
            reward,
            control_box,
            mode,
        })
    }

    /// A principal holding `b` fixed, with zero reward.
    pub fn fixed(b: Vec<f64>) -> Self {
        let bounds = b.iter().map(|v| (*v, *v)).collect();
        PrincipalModel {
            reward: PrincipalReward::Constant(0.0),
            control_box: ControlBox { bounds },
            mode: PrincipalMode::Fixed(b),
        }
    }

    pub fn with_mode(&self, mode: PrincipalMode) -> Self {
        PrincipalModel {
            reward: self.reward.clone(),
            control_box: self.control_box.clone(),
            mode,
        }
    }

    pub fn holding(&self, b: Vec<f64>) -> Self {
        self.with_mode(PrincipalMode::Fixed(b))
    }

    /// Whether the control changes with the state between policy epochs.
    pub fn is_feedback(&self) -> bool {
        matches!(self.mode, PrincipalMode::BestResponse)
    }

    /// Control used at state `x` and time `t`.
    pub fn control(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        match &self.mode {
            PrincipalMode::Fixed(b) => Ok(b.clone()),
            PrincipalMode::BestResponse => best_response(x, &self.reward, &self.control_box),
            PrincipalMode::Policy(s) => {
                let k = libm::floor(t / s.tau + 1e-12);
                let k = if k < 0.0 { 0 } else { k as usize };
                let stage = &s.stages[k.min(s.stages.len() - 1)];
                Ok(stage.action_at(x))
            }
        }
    }

    /// Next time after `t` at which a policy-mode control may switch.
    pub fn next_switch(&self, t: f64) -> Option<f64> {
        match &self.mode {
            PrincipalMode::Policy(s) => {
                let k = libm::floor(t / s.tau + 1e-12) + 1.0;
                Some(k * s.tau)
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_grid_is_row_major() {
        let b = ControlBox::new(alloc::vec![(0.0, 1.0), (2.0, 4.0)]).unwrap();
        let g = b.grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], alloc::vec![0.0, 2.0]);
        assert_eq!(g[1], alloc::vec![0.0, 3.0]);
        assert_eq!(g[8], alloc::vec![1.0, 4.0]);
    }

    #[test]
    fn fixed_control_must_be_admissible() {
        let b = ControlBox::interval(0.0, 1.0).unwrap();
        assert!(PrincipalModel::new(PrincipalReward::Constant(0.0), b.clone(), PrincipalMode::Fixed(alloc::vec![2.0])).is_err());
        assert!(PrincipalModel::new(PrincipalReward::Constant(0.0), b, PrincipalMode::Fixed(alloc::vec![0.5])).is_ok());
    }

    #[test]
    fn quadratic_reward() {
        let r = PrincipalReward::Quadratic {
            x_weights: alloc::vec![1.0, -1.0],
            b_linear: alloc::vec![2.0],
            b_quadratic: alloc::vec![1.0],
            cross: alloc::vec![0.5, 0.0],
        };
        let v = r.eval(&[0.25, 0.75], &[1.5]).unwrap();
        assert!((v - (-0.5 + 3.0 - 2.25 + 0.5 * 0.25 * 1.5)).abs() < 1e-14);
    }
}
