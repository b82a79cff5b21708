use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::model::classes::{ClassStructure, CommMode};
use crate::model::growth::GrowthCoefficients;
use crate::model::kernel::{Attachment, KernelSpec};
use crate::model::payoff::PayoffModel;

pub type GroupRateFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Rate `Pi(R_1, .., R_k)` at which a group of agents meets and copies its
/// best member. Must be symmetric and vanish on equal arguments.
#[derive(Clone, Default)]
pub enum GroupRate {
    /// `max R - min R`.
    #[default]
    Spread,
    Custom(Arc<GroupRateFn>),
}

impl fmt::Debug for GroupRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupRate::Spread => f.write_str("Spread"),
            GroupRate::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl GroupRate {
    pub fn eval(&self, rewards: &[f64]) -> f64 {
        match self {
            GroupRate::Spread => {
                let (lo, hi) = rewards
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                        (lo.min(*r), hi.max(*r))
                    });
                if rewards.is_empty() {
                    0.0
                } else {
                    hi - lo
                }
            }
            GroupRate::Custom(f) => f(rewards),
        }
    }
}

/// A model family: which jump process runs at finite population and which
/// ODE describes its limit.
#[derive(Debug, Clone)]
pub enum Dynamics {
    /// Pairwise imitation proportional to the payoff gap.
    Replicator { payoff: PayoffModel, kappa: f64 },
    /// Groups of up to `max_order` agents from distinct states adopt the
    /// strategy of their best member.
    KthOrder {
        payoff: PayoffModel,
        kappa: f64,
        max_order: usize,
        group_rate: GroupRate,
    },
    /// Several classes of agents sharing `d` strategies. States are laid out
    /// class-major: slot `alpha * d + j`.
    Multiclass {
        payoffs: Vec<PayoffModel>,
        classes: ClassStructure,
    },
    Growth {
        coeffs: GrowthCoefficients,
        max_index: usize,
    },
    /// Merging and splitting of coalitions; slot `k` holds size `k + 1`.
    Coalition { kernel: KernelSpec, max_index: usize },
    Attachment { attach: Attachment, max_index: usize },
    /// Sum of countable-state families sharing one truncation.
    Composite(Vec<Dynamics>),
}

impl Dynamics {
    pub fn replicator(payoff: PayoffModel, kappa: f64) -> Result<Self> {
        let d = Dynamics::Replicator { payoff, kappa };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Dynamics::Replicator { kappa, .. } => check_kappa(*kappa),
            Dynamics::KthOrder {
                payoff,
                kappa,
                max_order,
                ..
            } => {
                check_kappa(*kappa)?;
                let d = payoff.strategies();
                if *max_order < 2 || *max_order > d.max(2) {
                    return Err(Error::config(format!(
                        "group order must lie in 2..={d}, got {max_order}"
                    )));
                }
                Ok(())
            }
            Dynamics::Multiclass { payoffs, classes } => {
                classes.validate()?;
                if payoffs.len() != classes.num_classes() {
                    return Err(Error::config(format!(
                        "{} class payoffs for {} classes",
                        payoffs.len(),
                        classes.num_classes()
                    )));
                }
                let d = payoffs[0].strategies();
                if payoffs.iter().any(|p| p.strategies() != d) {
                    return Err(Error::config("all classes must share the same strategy count"));
                }
                Ok(())
            }
            Dynamics::Growth { max_index, .. }
            | Dynamics::Coalition { max_index, .. }
            | Dynamics::Attachment { max_index, .. } => {
                if *max_index == 0 {
                    Err(Error::config("truncation bound must be positive"))
                } else {
                    Ok(())
                }
            }
            Dynamics::Composite(parts) => {
                if parts.is_empty() {
                    return Err(Error::config("composite dynamics has no parts"));
                }
                let dim = parts[0].state_dim();
                for p in parts {
                    p.validate()?;
                    if p.is_simplex() {
                        return Err(Error::config(
                            "composite dynamics combines countable-state families only",
                        ));
                    }
                    if p.state_dim() != dim {
                        return Err(Error::config("composite parts must share the truncation bound"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Number of strategies per class for simplex families.
    pub fn strategies(&self) -> usize {
        match self {
            Dynamics::Replicator { payoff, .. } | Dynamics::KthOrder { payoff, .. } => {
                payoff.strategies()
            }
            Dynamics::Multiclass { payoffs, .. } => payoffs[0].strategies(),
            _ => self.state_dim(),
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            Dynamics::Replicator { payoff, .. } | Dynamics::KthOrder { payoff, .. } => {
                payoff.strategies()
            }
            Dynamics::Multiclass { payoffs, classes } => {
                payoffs[0].strategies() * classes.num_classes()
            }
            Dynamics::Growth { max_index, .. }
            | Dynamics::Coalition { max_index, .. }
            | Dynamics::Attachment { max_index, .. } => *max_index,
            Dynamics::Composite(parts) => parts[0].state_dim(),
        }
    }

    /// Families whose state lives on one or several probability simplices.
    pub fn is_simplex(&self) -> bool {
        matches!(
            self,
            Dynamics::Replicator { .. } | Dynamics::KthOrder { .. } | Dynamics::Multiclass { .. }
        )
    }

    /// `(start, len)` of each simplex block in the state vector.
    pub fn simplex_blocks(&self) -> Vec<(usize, usize)> {
        match self {
            Dynamics::Replicator { .. } | Dynamics::KthOrder { .. } => {
                alloc::vec![(0, self.state_dim())]
            }
            Dynamics::Multiclass { classes, .. } => match classes.comm_mode {
                CommMode::NoCommunication => {
                    let d = self.strategies();
                    (0..classes.num_classes()).map(|a| (a * d, d)).collect()
                }
                CommMode::FullCommunication => alloc::vec![(0, self.state_dim())],
            },
            _ => Vec::new(),
        }
    }

    /// Macroscopic state seen by payoffs and the principal.
    pub fn observe(&self, counts: &[u64], scale: f64) -> Vec<f64> {
        if !self.is_simplex() {
            return counts.iter().map(|n| *n as f64 * scale).collect();
        }
        let mut x = alloc::vec![0.0; counts.len()];
        for (start, len) in self.simplex_blocks() {
            let block = &counts[start..start + len];
            let n: u64 = block.iter().sum();
            if n > 0 {
                let inv = 1.0 / n as f64;
                for (o, c) in x[start..start + len].iter_mut().zip(block) {
                    *o = *c as f64 * inv;
                }
            }
        }
        x
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("interaction rate kappa must be positive, got {kappa}")))
    }
}

/// Strategy marginal of a class-major multiclass state.
pub(crate) fn strategy_marginal(x: &[f64], d: usize) -> Vec<f64> {
    let mut m = alloc::vec![0.0; d];
    for (i, v) in x.iter().enumerate() {
        m[i % d] += v;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::payoff::TabularPayoff;
    use alloc::vec;

    #[test]
    fn spread_rate() {
        assert_eq!(GroupRate::Spread.eval(&[1.0, 4.0, 2.0]), 3.0);
        assert_eq!(GroupRate::Spread.eval(&[2.0, 2.0]), 0.0);
    }

    #[test]
    fn multiclass_observation_normalizes_per_class() {
        let p = PayoffModel::tabular(TabularPayoff::linear(vec![0.0, 1.0], None).unwrap());
        let dyn_c1 = Dynamics::Multiclass {
            payoffs: vec![p.clone(), p.clone()],
            classes: ClassStructure::new(CommMode::NoCommunication, vec![0.25, 0.75], vec![1.0, 1.0]).unwrap(),
        };
        let x = dyn_c1.observe(&[1, 3, 6, 6], 0.0625);
        assert_eq!(x, vec![0.25, 0.75, 0.5, 0.5]);
        let dyn_c2 = Dynamics::Multiclass {
            payoffs: vec![p.clone(), p],
            classes: ClassStructure::new(CommMode::FullCommunication, vec![0.25, 0.75], vec![1.0, 1.0]).unwrap(),
        };
        let x = dyn_c2.observe(&[1, 3, 6, 6], 0.0625);
        assert_eq!(x, vec![1.0 / 16.0, 3.0 / 16.0, 6.0 / 16.0, 6.0 / 16.0]);
    }

    #[test]
    fn kth_order_bounds() {
        let p = PayoffModel::tabular(TabularPayoff::linear(vec![0.0, 1.0, 2.0], None).unwrap());
        let bad = Dynamics::KthOrder { payoff: p.clone(), kappa: 1.0, max_order: 4, group_rate: GroupRate::Spread };
        assert!(bad.validate().is_err());
        let ok = Dynamics::KthOrder { payoff: p, kappa: 1.0, max_order: 3, group_rate: GroupRate::Spread };
        assert!(ok.validate().is_ok());
    }
}
