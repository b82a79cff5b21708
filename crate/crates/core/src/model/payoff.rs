//! Payoffs of small players against the principal's control.
//!
//! Every catalog entry is written as `R_j(x, b)` where `j` is the strategy
//! (resistance level), `x` the crowd distribution and `b` the principal's
//! control. The engine always maximizes: entries that are costs carry
//! [`Orientation::Minimize`] and are negated by [`PayoffModel::reward`].

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Maximize,
    Minimize,
}

/// Control seen by strategy `j`: a scalar control is shared by every
/// strategy, a vector control is an allocation with one entry per strategy.
pub fn control_component(b: &[f64], j: usize) -> f64 {
    match b.len() {
        0 => 0.0,
        1 => b[0],
        _ => b.get(j).copied().unwrap_or(b[0]),
    }
}

pub type DetectionFn = dyn Fn(usize, &[f64], &[f64]) -> f64 + Send + Sync;

/// Probability `p_j(x, b)` that strategy `j` is detected (or infected, or
/// succeeds, depending on the story).
#[derive(Clone)]
pub enum Detection {
    Constant(f64),
    /// `min(1, b_j / (1 + theta * mean_level))`.
    Saturating { theta: f64 },
    /// `sigmoid(a * b_j - c * r_j - d * mean_level)`.
    Logistic { a: f64, c: f64, d: f64 },
    Custom(Arc<DetectionFn>),
}

impl fmt::Debug for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Detection::Constant(p) => f.debug_tuple("Constant").field(p).finish(),
            Detection::Saturating { theta } => {
                f.debug_struct("Saturating").field("theta", theta).finish()
            }
            Detection::Logistic { a, c, d } => f
                .debug_struct("Logistic")
                .field("a", a)
                .field("c", c)
                .field("d", d)
                .finish(),
            Detection::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Fine `f(r_j)` paid on detection.
#[derive(Debug, Clone, PartialEq)]
pub enum Fine {
    Constant(f64),
    Affine { intercept: f64, slope: f64 },
    Table(Vec<f64>),
}

impl Fine {
    pub fn eval(&self, j: usize, level: f64) -> f64 {
        match self {
            Fine::Constant(c) => *c,
            Fine::Affine { intercept, slope } => intercept + slope * level,
            Fine::Table(t) => t.get(j).copied().unwrap_or(0.0),
        }
    }
}

/// `intercept + slope * b`, used for recruitment benefits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlAffine {
    pub intercept: f64,
    pub slope: f64,
}

impl ControlAffine {
    pub fn constant(c: f64) -> Self {
        ControlAffine {
            intercept: c,
            slope: 0.0,
        }
    }

    pub fn eval(&self, b: f64) -> f64 {
        self.intercept + self.slope * b
    }
}

fn per_strategy(v: &[ControlAffine], j: usize) -> ControlAffine {
    if v.len() == 1 {
        v[0]
    } else {
        v[j]
    }
}

/// Payoff table over a control grid, optionally linear in `x`:
/// `R_j(x, b) = T_j(b) + sum_k A_jk x_k` with `T_j` multilinear in `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPayoff {
    d: usize,
    grid: Grid,
    values: Vec<f64>,
    x_coeffs: Option<Vec<f64>>,
}

impl TabularPayoff {
    /// `values` holds `d` blocks, one per strategy, each laid out row-major
    /// over the control grid spanned by `b_axes`.
    pub fn new(
        d: usize,
        b_axes: Vec<Vec<f64>>,
        values: Vec<f64>,
        x_coeffs: Option<Vec<f64>>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::config("tabular payoff needs at least one strategy"));
        }
        let grid = Grid::new(b_axes)?;
        if values.len() != d * grid.len() {
            return Err(Error::config(format!(
                "tabular payoff expects {} values ({} strategies x {} control nodes), got {}",
                d * grid.len(),
                d,
                grid.len(),
                values.len()
            )));
        }
        if let Some(a) = &x_coeffs {
            if a.len() != d * d {
                return Err(Error::config(format!(
                    "tabular x coefficients must be {d}x{d}, got {} entries",
                    a.len()
                )));
            }
        }
        if values.iter().chain(x_coeffs.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::config("tabular payoff contains non-finite entries"));
        }
        Ok(TabularPayoff {
            d,
            grid,
            values,
            x_coeffs,
        })
    }

    /// Control-independent payoff `c_j + sum_k A_jk x_k`.
    pub fn linear(constants: Vec<f64>, x_coeffs: Option<Vec<f64>>) -> Result<Self> {
        let d = constants.len();
        Self::new(d, Vec::new(), constants, x_coeffs)
    }

    pub fn strategies(&self) -> usize {
        self.d
    }

    pub fn b_axes(&self) -> &[Vec<f64>] {
        self.grid.axes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x_coeffs(&self) -> Option<&[f64]> {
        self.x_coeffs.as_deref()
    }

    pub fn eval(&self, j: usize, x: &[f64], b: &[f64]) -> f64 {
        let g = self.grid.len();
        let block = &self.values[j * g..(j + 1) * g];
        let mut r = if self.grid.dims() == 0 {
            block[0]
        } else {
            self.grid.interpolate(block, b)
        };
        if let Some(a) = &self.x_coeffs {
            let row = &a[j * self.d..(j + 1) * self.d];
            r += math::dot(row, x);
        }
        r
    }
}

#[derive(Debug, Clone)]
pub enum PayoffKind {
    /// `r + (1 - p_j) r_j - p_j f(r_j)`.
    Inspection { legal: f64, levels: Vec<f64>, fine: Fine },
    /// `(1 - p_j)(r_j + w) + p_j (w0 - f(r_j))`.
    Corruption {
        wage: f64,
        reservation_wage: f64,
        levels: Vec<f64>,
        fine: Fine,
    },
    /// Cost `p_j c + r_j`.
    Cyber { infection_cost: f64, levels: Vec<f64> },
    /// `(1 - p_j) r_fail_j(b) + p_j (S_j + r_succ_j(b))`.
    Terror {
        gains: Vec<f64>,
        fail: Vec<ControlAffine>,
        success: Vec<ControlAffine>,
    },
    Tabular(TabularPayoff),
}

#[derive(Debug, Clone)]
pub struct PayoffModel {
    pub kind: PayoffKind,
    pub detection: Detection,
    pub orientation: Orientation,
}

impl PayoffModel {
    pub fn new(kind: PayoffKind, detection: Detection, orientation: Orientation) -> Result<Self> {
        let m = PayoffModel {
            kind,
            detection,
            orientation,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn inspection(legal: f64, levels: Vec<f64>, fine: Fine, detection: Detection) -> Result<Self> {
        Self::new(
            PayoffKind::Inspection { legal, levels, fine },
            detection,
            Orientation::Maximize,
        )
    }

    pub fn corruption(
        wage: f64,
        reservation_wage: f64,
        levels: Vec<f64>,
        fine: Fine,
        detection: Detection,
    ) -> Result<Self> {
        Self::new(
            PayoffKind::Corruption {
                wage,
                reservation_wage,
                levels,
                fine,
            },
            detection,
            Orientation::Maximize,
        )
    }

    pub fn cyber(infection_cost: f64, levels: Vec<f64>, detection: Detection) -> Result<Self> {
        Self::new(
            PayoffKind::Cyber {
                infection_cost,
                levels,
            },
            detection,
            Orientation::Minimize,
        )
    }

    pub fn terror(
        gains: Vec<f64>,
        fail: Vec<ControlAffine>,
        success: Vec<ControlAffine>,
        detection: Detection,
    ) -> Result<Self> {
        Self::new(
            PayoffKind::Terror {
                gains,
                fail,
                success,
            },
            detection,
            Orientation::Maximize,
        )
    }

    pub fn tabular(table: TabularPayoff) -> Self {
        PayoffModel {
            kind: PayoffKind::Tabular(table),
            detection: Detection::Constant(0.0),
            orientation: Orientation::Maximize,
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.strategies();
        if d == 0 {
            return Err(Error::config("payoff needs at least one strategy"));
        }
        match &self.kind {
            PayoffKind::Inspection { fine: Fine::Table(t), .. }
            | PayoffKind::Corruption { fine: Fine::Table(t), .. }
                if t.len() != d =>
            {
                Err(Error::config(format!(
                    "fine table has {} entries for {d} strategies",
                    t.len()
                )))
            }
            PayoffKind::Terror { fail, success, .. }
                if !(fail.len() == 1 || fail.len() == d)
                    || !(success.len() == 1 || success.len() == d) =>
            {
                Err(Error::config(
                    "terror recruitment benefits need one entry or one per strategy",
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn strategies(&self) -> usize {
        match &self.kind {
            PayoffKind::Inspection { levels, .. }
            | PayoffKind::Corruption { levels, .. }
            | PayoffKind::Cyber { levels, .. } => levels.len(),
            PayoffKind::Terror { gains, .. } => gains.len(),
            PayoffKind::Tabular(t) => t.strategies(),
        }
    }

    /// Level attached to strategy `j` (resistance, bribe, defence, gain).
    pub fn level(&self, j: usize) -> f64 {
        match &self.kind {
            PayoffKind::Inspection { levels, .. }
            | PayoffKind::Corruption { levels, .. }
            | PayoffKind::Cyber { levels, .. } => levels[j],
            PayoffKind::Terror { gains, .. } => gains[j],
            PayoffKind::Tabular(_) => j as f64,
        }
    }

    /// Mean resistance `sum_j x_j r_j` under the distribution `x`.
    pub fn mean_level(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .take(self.strategies())
            .map(|(j, xj)| xj * self.level(j))
            .sum()
    }

    pub fn detection_probability(&self, j: usize, x: &[f64], b: &[f64]) -> Result<f64> {
        let p = match &self.detection {
            Detection::Constant(p) => *p,
            Detection::Saturating { theta } => {
                let bj = control_component(b, j);
                f64::min(1.0, bj / (1.0 + theta * self.mean_level(x)))
            }
            Detection::Logistic { a, c, d } => {
                let bj = control_component(b, j);
                math::sigmoid(a * bj - c * self.level(j) - d * self.mean_level(x))
            }
            Detection::Custom(f) => f(j, x, b),
        };
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain {
                j,
                b: b.to_vec(),
                p,
            });
        }
        Ok(p)
    }

    /// The payoff as written in its own orientation (a cost for cyber).
    pub fn raw(&self, j: usize, x: &[f64], b: &[f64]) -> Result<f64> {
        if j >= self.strategies() {
            return Err(Error::input(format!(
                "strategy {j} out of range for {} strategies",
                self.strategies()
            )));
        }
        if let PayoffKind::Tabular(t) = &self.kind {
            return Ok(t.eval(j, x, b));
        }
        let p = self.detection_probability(j, x, b)?;
        let r = match &self.kind {
            PayoffKind::Inspection {
                legal,
                levels,
                fine,
            } => legal + (1.0 - p) * levels[j] - p * fine.eval(j, levels[j]),
            PayoffKind::Corruption {
                wage,
                reservation_wage,
                levels,
                fine,
            } => (1.0 - p) * (levels[j] + wage) + p * (reservation_wage - fine.eval(j, levels[j])),
            PayoffKind::Cyber {
                infection_cost,
                levels,
            } => p * infection_cost + levels[j],
            PayoffKind::Terror {
                gains,
                fail,
                success,
            } => {
                let bj = control_component(b, j);
                (1.0 - p) * per_strategy(fail, j).eval(bj)
                    + p * (gains[j] + per_strategy(success, j).eval(bj))
            }
            PayoffKind::Tabular(_) => unreachable!(),
        };
        Ok(r)
    }

    /// Engine-facing reward: the raw payoff, negated for cost payoffs.
    pub fn reward(&self, j: usize, x: &[f64], b: &[f64]) -> Result<f64> {
        let r = self.raw(j, x, b)?;
        Ok(match self.orientation {
            Orientation::Maximize => r,
            Orientation::Minimize => -r,
        })
    }

    /// Rewards of all strategies written into `out`.
    pub fn rewards_into(&self, x: &[f64], b: &[f64], out: &mut [f64]) -> Result<()> {
        for (j, o) in out.iter_mut().enumerate().take(self.strategies()) {
            *o = self.reward(j, x, b)?;
        }
        Ok(())
    }

    pub fn rewards(&self, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let mut out = alloc::vec![0.0; self.strategies()];
        self.rewards_into(x, b, &mut out)?;
        Ok(out)
    }

    /// Principal's cost in the counterterrorism story,
    /// `sum_j x_j [(1 - p_j) b + p_j (b + S_j)]`.
    pub fn terror_principal_cost(&self, x: &[f64], b: &[f64]) -> Result<f64> {
        let PayoffKind::Terror { gains, .. } = &self.kind else {
            return Err(Error::config("principal cost is defined for the terror payoff only"));
        };
        let mut cost = 0.0;
        for (j, s) in gains.iter().enumerate() {
            let p = self.detection_probability(j, x, b)?;
            let bj = control_component(b, j);
            cost += x[j] * ((1.0 - p) * bj + p * (bj + s));
        }
        Ok(cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn custom(f: impl Fn(usize, &[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Detection {
        Detection::Custom(Arc::new(f))
    }

    const X: [f64; 1] = [1.0];

    #[test]
    fn inspection_examples() {
        let none = PayoffModel::inspection(1.0, vec![2.0], Fine::Constant(0.5), Detection::Constant(0.0)).unwrap();
        assert_eq!(none.raw(0, &X, &[0.0]).unwrap(), 3.0);
        let all = PayoffModel::inspection(1.0, vec![2.0], Fine::Constant(0.5), Detection::Constant(1.0)).unwrap();
        assert_eq!(all.raw(0, &X, &[0.0]).unwrap(), 0.5);
        // p = b / (1 + b) at b = 1 gives 1 + 0.5 * 2 - 0.5 * 4 = 0
        let curve = custom(|_, _, b| b[0] / (1.0 + b[0]));
        let m = PayoffModel::inspection(1.0, vec![2.0], Fine::Constant(4.0), curve).unwrap();
        assert!(m.raw(0, &X, &[1.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn corruption_examples() {
        let m = PayoffModel::corruption(2.0, 0.0, vec![1.0], Fine::Constant(0.0), Detection::Constant(0.0)).unwrap();
        assert_eq!(m.raw(0, &X, &[0.0]).unwrap(), 3.0);
        let m = PayoffModel::corruption(2.0, 1.0, vec![1.0], Fine::Constant(1.0), Detection::Constant(1.0)).unwrap();
        assert_eq!(m.raw(0, &X, &[0.0]).unwrap(), 0.0);
        let m = PayoffModel::corruption(1.0, 0.0, vec![2.0], Fine::Constant(3.0), Detection::Constant(0.5)).unwrap();
        assert_eq!(m.raw(0, &X, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn cyber_examples_and_orientation() {
        let m = PayoffModel::cyber(5.0, vec![0.2], Detection::Constant(0.0)).unwrap();
        assert_eq!(m.raw(0, &X, &[0.0]).unwrap(), 0.2);
        assert_eq!(m.reward(0, &X, &[0.0]).unwrap(), -0.2);
        let m = PayoffModel::cyber(5.0, vec![0.0], Detection::Constant(1.0)).unwrap();
        assert_eq!(m.raw(0, &X, &[0.0]).unwrap(), 5.0);
        let m = PayoffModel::cyber(10.0, vec![1.0], Detection::Constant(0.3)).unwrap();
        assert!((m.raw(0, &X, &[0.0]).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn terror_examples() {
        let m = PayoffModel::terror(
            vec![4.0],
            vec![ControlAffine { intercept: 1.0, slope: 0.5 }],
            vec![ControlAffine::constant(0.0)],
            Detection::Constant(0.0),
        )
        .unwrap();
        assert_eq!(m.raw(0, &X, &[2.0]).unwrap(), 2.0);
        let m = PayoffModel::terror(
            vec![4.0],
            vec![ControlAffine::constant(1.0)],
            vec![ControlAffine::constant(0.0)],
            Detection::Constant(1.0),
        )
        .unwrap();
        assert_eq!(m.raw(0, &X, &[2.0]).unwrap(), 4.0);
        let m = PayoffModel::terror(
            vec![4.0],
            vec![ControlAffine::constant(1.0)],
            vec![ControlAffine::constant(1.0)],
            Detection::Constant(0.5),
        )
        .unwrap();
        assert_eq!(m.raw(0, &X, &[2.0]).unwrap(), 3.0);
    }

    #[test]
    fn terror_cost_reduces_to_budget_plus_expected_damage() {
        let m = PayoffModel::terror(
            vec![1.0, 3.0],
            vec![ControlAffine::constant(0.0)],
            vec![ControlAffine::constant(0.0)],
            custom(|j, _, _| if j == 0 { 0.2 } else { 0.6 }),
        )
        .unwrap();
        let x = [0.25, 0.75];
        let c = m.terror_principal_cost(&x, &[2.0]).unwrap();
        assert!((c - (2.0 + 0.25 * 0.2 * 1.0 + 0.75 * 0.6 * 3.0)).abs() < 1e-14);
    }

    #[test]
    fn out_of_range_detection_names_strategy() {
        let m = PayoffModel::inspection(0.0, vec![1.0, 2.0], Fine::Constant(1.0), custom(|j, _, _| j as f64 * 1.5)).unwrap();
        assert!(m.raw(0, &[0.5, 0.5], &[0.3]).is_ok());
        match m.raw(1, &[0.5, 0.5], &[0.3]) {
            Err(Error::Domain { j, b, .. }) => {
                assert_eq!(j, 1);
                assert_eq!(b, vec![0.3]);
            }
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn builtin_curves_stay_in_unit_interval() {
        let levels = vec![0.0, 1.0, 2.0];
        for det in [
            Detection::Saturating { theta: 2.0 },
            Detection::Logistic { a: 3.0, c: 0.5, d: 1.0 },
        ] {
            let m = PayoffModel::inspection(1.0, levels.clone(), Fine::Affine { intercept: 0.0, slope: 2.0 }, det).unwrap();
            for b in [0.0, 0.3, 1.0, 5.0] {
                for x in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5], [0.0, 0.0, 1.0]] {
                    for j in 0..3 {
                        let p = m.detection_probability(j, &x, &[b]).unwrap();
                        assert!((0.0..=1.0).contains(&p));
                    }
                }
            }
        }
    }

    #[test]
    fn tabular_interpolates_in_control_and_adds_linear_part() {
        let t = TabularPayoff::new(
            2,
            vec![vec![0.0, 1.0]],
            vec![0.0, 1.0, 2.0, 0.0],
            Some(vec![0.0, 1.0, 1.0, 0.0]),
        )
        .unwrap();
        let m = PayoffModel::tabular(t);
        let x = [0.3, 0.7];
        assert!((m.reward(0, &x, &[0.25]).unwrap() - (0.25 + 0.7)).abs() < 1e-15);
        assert!((m.reward(1, &x, &[0.25]).unwrap() - (1.5 + 0.3)).abs() < 1e-15);
    }
}
