//! Coalition merge/split kernels and preferential-attachment parameters.
//!
//! Sizes are 1-based throughout this module: `k = 1` is a lone agent.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::model::payoff::control_component;

pub type PairRateFn = dyn Fn(usize, usize, &[f64], &[f64]) -> f64 + Send + Sync;
pub type SizePayoffFn = dyn Fn(usize, &[f64], &[f64]) -> f64 + Send + Sync;
pub type StateRateFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// Weight table `a_{l,k}` (sizes, 1-based). Missing entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Uniform(f64),
    Table(Vec<Vec<f64>>),
}

impl Coefficients {
    pub fn get(&self, l: usize, k: usize) -> f64 {
        match self {
            Coefficients::Uniform(a) => *a,
            Coefficients::Table(rows) => rows
                .get(l.wrapping_sub(1))
                .and_then(|r| r.get(k.wrapping_sub(1)))
                .copied()
                .unwrap_or(0.0),
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        let bad = match self {
            Coefficients::Uniform(a) => !(*a >= 0.0 && a.is_finite()),
            Coefficients::Table(rows) => rows.iter().flatten().any(|a| !(*a >= 0.0 && a.is_finite())),
        };
        if bad {
            Err(Error::config(format!("{what} weights must be finite and non-negative")))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone)]
pub enum RateKernel {
    Zero,
    Constant(f64),
    /// Driven by payoff gains of the members involved.
    Strategic,
    Custom(Arc<PairRateFn>),
}

impl fmt::Debug for RateKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateKernel::Zero => f.write_str("Zero"),
            RateKernel::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            RateKernel::Strategic => f.write_str("Strategic"),
            RateKernel::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Payoff `R_k(x, b)` of a member of a size-`k` coalition.
#[derive(Clone)]
pub enum SizePayoff {
    /// Per-size values; sizes past the end reuse the last entry.
    Table(Vec<f64>),
    /// `intercept + slope * k - control_slope * b`.
    Affine {
        intercept: f64,
        slope: f64,
        control_slope: f64,
    },
    Custom(Arc<SizePayoffFn>),
}

impl fmt::Debug for SizePayoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizePayoff::Table(t) => f.debug_tuple("Table").field(t).finish(),
            SizePayoff::Affine {
                intercept,
                slope,
                control_slope,
            } => f
                .debug_struct("Affine")
                .field("intercept", intercept)
                .field("slope", slope)
                .field("control_slope", control_slope)
                .finish(),
            SizePayoff::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl SizePayoff {
    pub fn eval(&self, k: usize, x: &[f64], b: &[f64]) -> f64 {
        match self {
            SizePayoff::Table(t) => {
                if t.is_empty() {
                    0.0
                } else {
                    t[(k - 1).min(t.len() - 1)]
                }
            }
            SizePayoff::Affine {
                intercept,
                slope,
                control_slope,
            } => intercept + slope * k as f64 - control_slope * control_component(b, 0),
            SizePayoff::Custom(f) => f(k, x, b),
        }
    }

    /// `R_1 .. R_max` as a vector indexed by `size - 1`.
    pub fn table(&self, max_size: usize, x: &[f64], b: &[f64]) -> Vec<f64> {
        (1..=max_size).map(|k| self.eval(k, x, b)).collect()
    }
}

/// Injection intensity `lambda(x, b)`.
#[derive(Clone)]
pub enum ControlRate {
    Constant(f64),
    /// `max(0, intercept + slope * b)`.
    Affine { intercept: f64, slope: f64 },
    Custom(Arc<StateRateFn>),
}

impl fmt::Debug for ControlRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlRate::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            ControlRate::Affine { intercept, slope } => f
                .debug_struct("Affine")
                .field("intercept", intercept)
                .field("slope", slope)
                .finish(),
            ControlRate::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ControlRate {
    pub fn eval(&self, x: &[f64], b: &[f64]) -> Result<f64> {
        let v = match self {
            ControlRate::Constant(c) => *c,
            ControlRate::Affine { intercept, slope } => {
                f64::max(0.0, intercept + slope * control_component(b, 0))
            }
            ControlRate::Custom(f) => f(x, b),
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::numerical(format!("injection rate is {v}"), x));
        }
        Ok(v)
    }
}

/// Preferential attachment: an entrant founds a new coalition with
/// probability `alpha`, otherwise joins one with probability proportional to
/// its size.
#[derive(Debug, Clone)]
pub struct Attachment {
    pub alpha: f64,
    pub lambda: ControlRate,
}

impl Attachment {
    pub fn new(alpha: f64, lambda: ControlRate) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::config(format!("attachment alpha {alpha} outside [0,1]")));
        }
        if let ControlRate::Constant(c) = lambda {
            if !(c >= 0.0) {
                return Err(Error::config("injection rate must be non-negative"));
            }
        }
        Ok(Attachment { alpha, lambda })
    }
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub merge: RateKernel,
    pub split: RateKernel,
    pub merge_weights: Coefficients,
    pub split_weights: Coefficients,
    pub payoff: Option<SizePayoff>,
    pub attach: Option<Attachment>,
}

impl KernelSpec {
    pub fn new(
        merge: RateKernel,
        split: RateKernel,
        merge_weights: Coefficients,
        split_weights: Coefficients,
        payoff: Option<SizePayoff>,
    ) -> Result<Self> {
        merge_weights.validate("merge")?;
        split_weights.validate("split")?;
        for (k, name) in [(&merge, "merge"), (&split, "split")] {
            if let RateKernel::Constant(c) = k {
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(Error::config(format!("{name} rate must be non-negative")));
                }
            }
            if matches!(k, RateKernel::Strategic) && payoff.is_none() {
                return Err(Error::config(format!(
                    "strategic {name} kernel needs a per-size payoff"
                )));
            }
        }
        Ok(KernelSpec {
            merge,
            split,
            merge_weights,
            split_weights,
            payoff,
            attach: None,
        })
    }

    /// Constant coagulation and fragmentation rates.
    pub fn constant(merge: f64, split: f64) -> Result<Self> {
        let k = |c: f64| if c == 0.0 { RateKernel::Zero } else { RateKernel::Constant(c) };
        Self::new(
            k(merge),
            k(split),
            Coefficients::Uniform(1.0),
            Coefficients::Uniform(1.0),
            None,
        )
    }

    pub fn with_attachment(mut self, attach: Attachment) -> Self {
        self.attach = Some(attach);
        self
    }

    /// Per-size payoffs `R_1 .. R_max` at `(x, b)`; empty when no payoff is set.
    pub fn size_rewards(&self, max_size: usize, x: &[f64], b: &[f64]) -> Vec<f64> {
        match &self.payoff {
            Some(p) => p.table(max_size, x, b),
            None => Vec::new(),
        }
    }

    /// Largest merge rate and largest total split rate over sizes up to
    /// `max_size`; both must be finite for the bounded-kernel regime.
    pub fn bounds(&self, max_size: usize, x: &[f64], b: &[f64]) -> Result<(f64, f64)> {
        let r = self.size_rewards(2 * max_size, x, b);
        let mut sup_c: f64 = 0.0;
        let mut sup_f: f64 = 0.0;
        for k in 1..=max_size {
            let mut total_split = 0.0;
            for j in 1..=max_size {
                let (c, f) = coalition_rates(k, j, x, b, self, &r)?;
                sup_c = sup_c.max(c);
                total_split += f;
            }
            sup_f = sup_f.max(total_split);
        }
        if !(sup_c.is_finite() && sup_f.is_finite()) {
            return Err(Error::numerical("unbounded coalition kernel", x));
        }
        Ok((sup_c, sup_f))
    }
}

fn gain(to: f64, from: f64) -> f64 {
    if to >= from {
        to - from
    } else {
        0.0
    }
}

/// Merge rate `C_kj` and split rate `F_kj` (zero unless `j < k`).
///
/// `r` holds per-size payoffs indexed by `size - 1` and must cover size
/// `k + j` when the merge kernel is strategic.
pub fn coalition_rates(
    k: usize,
    j: usize,
    x: &[f64],
    b: &[f64],
    kernel: &KernelSpec,
    r: &[f64],
) -> Result<(f64, f64)> {
    if k == 0 || j == 0 {
        return Err(Error::input("coalition sizes start at 1"));
    }
    let payoff = |size: usize| -> Result<f64> {
        r.get(size - 1).copied().ok_or_else(|| {
            Error::input(format!("per-size payoff missing for size {size}"))
        })
    };
    let merge = match &kernel.merge {
        RateKernel::Zero => 0.0,
        RateKernel::Constant(c) => *c,
        RateKernel::Strategic => {
            let joint = payoff(k + j)?;
            kernel.merge_weights.get(j + k, k) * gain(joint, payoff(k)?)
                + kernel.merge_weights.get(j + k, j) * gain(joint, payoff(j)?)
        }
        RateKernel::Custom(f) => f(k, j, x, b),
    };
    let split = if j < k {
        match &kernel.split {
            RateKernel::Zero => 0.0,
            RateKernel::Constant(c) => *c,
            RateKernel::Strategic => {
                let whole = payoff(k)?;
                kernel.split_weights.get(k, j) * gain(payoff(j)?, whole)
                    + kernel.split_weights.get(k, k - j) * gain(payoff(k - j)?, whole)
            }
            RateKernel::Custom(f) => f(k, j, x, b),
        }
    } else {
        0.0
    };
    if !(merge >= 0.0 && split >= 0.0) {
        return Err(Error::config(format!(
            "negative coalition rate (C={merge}, F={split}) for sizes ({k}, {j})"
        )));
    }
    Ok((merge, split))
}
