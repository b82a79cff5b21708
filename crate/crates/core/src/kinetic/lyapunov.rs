use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Positive weights `L(j)` defining the moment `(L, x) = sum_j L(j) x_j`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LyapunovWeight {
    values: Vec<f64>,
}

impl LyapunovWeight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::config("Lyapunov weights must be positive and finite"));
        }
        Ok(LyapunovWeight { values })
    }

    /// `L = 1`: total number (or total probability).
    pub fn ones(n: usize) -> Self {
        LyapunovWeight {
            values: alloc::vec![1.0; n],
        }
    }

    /// `L(j) = j` on sizes `1..=n`: total mass.
    pub fn sizes(n: usize) -> Self {
        LyapunovWeight {
            values: (1..=n).map(|k| k as f64).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn pair(&self, x: &[f64]) -> f64 {
        crate::math::dot(&self.values, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LyapunovMode {
    /// `(L, x(t))` never increases.
    NonIncrease,
    /// `(L, x(t)) <= e^{at} ((L, x_0) + b t)`.
    Subcritical { a: f64, b: f64 },
    /// `(L, x(t)) = e^{at} [(L, x_0) + (b/a)(1 - e^{-at})]`.
    Exact { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LyapunovReport {
    pub holds: bool,
    /// Time and size of the first violation beyond tolerance.
    pub first_violation: Option<(f64, f64)>,
    /// Largest excess over the bound (or deviation from the identity).
    pub max_excess: f64,
}

/// Checks the moment of every recorded state against `mode`, allowing a
/// relative tolerance `rtol`.
pub fn lyapunov_check(
    traj: &Trajectory,
    weight: &LyapunovWeight,
    mode: LyapunovMode,
    rtol: f64,
) -> Result<LyapunovReport> {
    let Some(x0) = traj.states.first() else {
        return Err(Error::input("empty trajectory"));
    };
    if traj.states.iter().any(|x| x.len() != weight.values.len()) {
        return Err(Error::input("Lyapunov weights and trajectory states differ in length"));
    }
    let m0 = weight.pair(x0);
    let mut report = LyapunovReport {
        holds: true,
        first_violation: None,
        max_excess: 0.0,
    };
    let mut prev = m0;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let m = weight.pair(x);
        let (excess, scale) = match mode {
            LyapunovMode::NonIncrease => {
                let e = m - prev;
                prev = m;
                (e, prev.abs().max(1.0))
            }
            LyapunovMode::Subcritical { a, b } => {
                let bound = libm::exp(a * t) * (m0 + b * t);
                (m - bound, bound.abs().max(1.0))
            }
            LyapunovMode::Exact { a, b } => {
                let exact = exact_moment(m0, a, b, *t);
                ((m - exact).abs(), exact.abs().max(1.0))
            }
        };
        report.max_excess = report.max_excess.max(excess);
        if excess > rtol * scale {
            report.holds = false;
            if report.first_violation.is_none() {
                report.first_violation = Some((*t, excess));
            }
        }
    }
    Ok(report)
}

/// Solution of `m' = a m + b` from `m0`.
fn exact_moment(m0: f64, a: f64, b: f64, t: f64) -> f64 {
    if a == 0.0 {
        m0 + b * t
    } else {
        libm::exp(a * t) * (m0 + b / a * -libm::expm1(-a * t))
    }
}
