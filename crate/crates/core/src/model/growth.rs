//! Birth, death, mutation and binary-interaction channels on a countable
//! (truncated) state space.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::model::payoff::control_component;

/// One bracket of the growth generator. Indices are 0-based slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthTerm {
    Birth { to: usize },
    Death { from: usize },
    Mutation { from: usize, to: usize },
    Split { from: usize, into: (usize, usize) },
    Merge { from: (usize, usize), to: usize },
    Regroup { from: (usize, usize), to: (usize, usize) },
}

impl GrowthTerm {
    pub fn consumed(&self) -> Vec<usize> {
        match *self {
            GrowthTerm::Birth { .. } => Vec::new(),
            GrowthTerm::Death { from } | GrowthTerm::Mutation { from, .. } | GrowthTerm::Split { from, .. } => {
                alloc::vec![from]
            }
            GrowthTerm::Merge { from, .. } | GrowthTerm::Regroup { from, .. } => alloc::vec![from.0, from.1],
        }
    }

    pub fn produced(&self) -> Vec<usize> {
        match *self {
            GrowthTerm::Death { .. } => Vec::new(),
            GrowthTerm::Birth { to } | GrowthTerm::Mutation { to, .. } | GrowthTerm::Merge { to, .. } => {
                alloc::vec![to]
            }
            GrowthTerm::Split { into, .. } | GrowthTerm::Regroup { to: into, .. } => alloc::vec![into.0, into.1],
        }
    }

    /// Net jump in occupation numbers, merged and sorted by index.
    pub fn delta(&self) -> Vec<(usize, i64)> {
        let mut d: Vec<(usize, i64)> = Vec::with_capacity(4);
        let mut add = |i: usize, v: i64| match d.iter_mut().find(|(k, _)| *k == i) {
            Some(e) => e.1 += v,
            None => d.push((i, v)),
        };
        for i in self.consumed() {
            add(i, -1);
        }
        for i in self.produced() {
            add(i, 1);
        }
        d.retain(|(_, v)| *v != 0);
        d.sort_unstable_by_key(|(i, _)| *i);
        d
    }

    pub fn max_index(&self) -> usize {
        self.consumed()
            .into_iter()
            .chain(self.produced())
            .max()
            .unwrap_or(0)
    }
}

pub type GrowthRateFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum RateLaw {
    Constant(f64),
    /// `max(0, c + control_slope * b) * prod_{consumed i} x_i`.
    MassAction { c: f64, control_slope: f64 },
    Custom(Arc<GrowthRateFn>),
}

impl fmt::Debug for RateLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateLaw::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            RateLaw::MassAction { c, control_slope } => f
                .debug_struct("MassAction")
                .field("c", c)
                .field("control_slope", control_slope)
                .finish(),
            RateLaw::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrowthChannel {
    pub term: GrowthTerm,
    pub rate: RateLaw,
}

impl GrowthChannel {
    pub fn new(term: GrowthTerm, rate: RateLaw) -> Self {
        GrowthChannel { term, rate }
    }

    /// Coefficient value at density `x` and control `b`.
    pub fn coefficient(&self, x: &[f64], b: &[f64]) -> Result<f64> {
        let v = match &self.rate {
            RateLaw::Constant(c) => *c,
            RateLaw::MassAction { c, control_slope } => {
                let base = f64::max(0.0, c + control_slope * control_component(b, 0));
                self.term
                    .consumed()
                    .iter()
                    .fold(base, |acc, i| acc * x.get(*i).copied().unwrap_or(0.0))
            }
            RateLaw::Custom(f) => f(x, b),
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::config(format!(
                "growth coefficient of {:?} evaluated to {v}",
                self.term
            )));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct GrowthCoefficients {
    pub channels: Vec<GrowthChannel>,
}

impl GrowthCoefficients {
    pub fn new(channels: Vec<GrowthChannel>) -> Self {
        GrowthCoefficients { channels }
    }

    /// True when no allowed transition can raise `sum_j L(j) n_j`
    /// (and there is no spontaneous birth).
    pub fn is_non_increasing(&self, lyapunov: &[f64]) -> bool {
        let l = |i: usize| lyapunov.get(i).copied().unwrap_or(f64::INFINITY);
        self.channels.iter().all(|c| {
            if matches!(c.term, GrowthTerm::Birth { .. }) {
                return false;
            }
            let before: f64 = c.term.consumed().into_iter().map(l).sum();
            let after: f64 = c.term.produced().into_iter().map(l).sum();
            after <= before
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deltas_cancel_repeated_indices() {
        let t = GrowthTerm::Regroup { from: (1, 2), to: (2, 1) };
        assert!(t.delta().is_empty());
        let t = GrowthTerm::Merge { from: (0, 0), to: 1 };
        assert_eq!(t.delta(), alloc::vec![(0, -2), (1, 1)]);
        let t = GrowthTerm::Split { from: 3, into: (0, 2) };
        assert_eq!(t.delta(), alloc::vec![(0, 1), (2, 1), (3, -1)]);
    }

    #[test]
    fn mass_action_uses_consumed_densities() {
        let c = GrowthChannel::new(
            GrowthTerm::Merge { from: (0, 1), to: 2 },
            RateLaw::MassAction { c: 2.0, control_slope: 0.0 },
        );
        assert_eq!(c.coefficient(&[0.5, 0.25, 0.0], &[]).unwrap(), 0.25);
    }

    #[test]
    fn non_increasing_check() {
        let l = [1.0, 2.0, 3.0, 4.0];
        let merging = GrowthCoefficients::new(alloc::vec![
            GrowthChannel::new(GrowthTerm::Merge { from: (0, 1), to: 2 }, RateLaw::Constant(1.0)),
            GrowthChannel::new(GrowthTerm::Split { from: 3, into: (0, 2) }, RateLaw::Constant(1.0)),
        ]);
        assert!(merging.is_non_increasing(&l));
        let birth = GrowthCoefficients::new(alloc::vec![GrowthChannel::new(
            GrowthTerm::Birth { to: 0 },
            RateLaw::Constant(1.0)
        )]);
        assert!(!birth.is_non_increasing(&l));
    }
}
