//! Law-of-large-numbers experiments: Monte-Carlo estimates of `E g(X_N(t))`
//! against the deterministic limit across population sizes, with fitted
//! decay orders compared to the guaranteed ones.

use alloc::string::String;
use alloc::vec::Vec;

use crate::equilibria::lattice_counts;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::kinetic::{integrate_final, Stepper};
use crate::markov::ensemble_mean;
use crate::math::{log, sqrt, weighted_slope};
use crate::model::{CommMode, Dynamics, OccupationState, PrincipalModel};
use crate::principal::{shapley_apply_markov, value_iterate, ShapleyOptions, ValueTable};
use crate::rng::mix_seed;

/// Declared regularity class of the observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regularity {
    /// Twice continuously differentiable.
    Smooth,
    Lipschitz,
}

/// Guaranteed decay order in `N` for fixed-population models.
pub fn simplex_bound_order(reg: Regularity) -> f64 {
    match reg {
        Regularity::Smooth => 0.5,
        Regularity::Lipschitz => 1.0 / 3.0,
    }
}

/// Guaranteed decay order in `1/h` for growth and coalition models;
/// `smooth_rates` selects the improved orders available when the rate
/// functions are twice differentiable.
pub fn countable_bound_order(reg: Regularity, smooth_rates: bool) -> f64 {
    match (reg, smooth_rates) {
        (Regularity::Smooth, false) => 1.0 / 3.0,
        (Regularity::Lipschitz, false) => 0.2,
        (Regularity::Smooth, true) => 1.0,
        (Regularity::Lipschitz, true) => 1.0 / 3.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Verdict {
    Pass,
    Fail,
    /// Too few points above the noise floor to fit an order.
    Inconclusive,
    /// The truncation suppressed too much rate for the run to be meaningful.
    Invalid,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateReport {
    pub n_values: Vec<u64>,
    pub errors: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Points whose error is within 3 standard errors of zero; not fitted.
    pub noise_dominated: Vec<bool>,
    /// Minus the slope of log(error) against log(N).
    pub fitted_order: Option<f64>,
    pub bound_order: f64,
    /// Orders of every applicable bound, for comparison.
    pub reference_orders: Vec<f64>,
    pub monotone: bool,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl RateReport {
    /// Assemble a report from per-`N` errors and standard errors.
    pub fn from_points(
        n_values: Vec<u64>,
        errors: Vec<f64>,
        stderrs: Vec<f64>,
        bound_order: f64,
        reference_orders: Vec<f64>,
    ) -> Result<Self> {
        if n_values.len() < 2 || errors.len() != n_values.len() || stderrs.len() != n_values.len() {
            return Err(Error::input("a rate report needs at least two sizes with matching errors"));
        }
        if n_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("population sizes must be increasing"));
        }
        let noise: Vec<bool> = errors.iter().zip(&stderrs).map(|(e, s)| *e <= 3.0 * s).collect();
        let monotone = (0..errors.len() - 1).all(|k| {
            errors[k + 1] <= errors[k] + 2.0 * sqrt(stderrs[k] * stderrs[k] + stderrs[k + 1] * stderrs[k + 1])
        });
        let kept: Vec<usize> = (0..errors.len()).filter(|k| !noise[*k]).collect();
        let fitted_order = if kept.len() >= 2 {
            let xs: Vec<f64> = kept.iter().map(|k| log(n_values[*k] as f64)).collect();
            let ys: Vec<f64> = kept.iter().map(|k| log(errors[*k])).collect();
            let ws: Vec<f64> = if kept.iter().any(|k| stderrs[*k] == 0.0) {
                alloc::vec![1.0; kept.len()]
            } else {
                kept.iter().map(|k| 1.0 / (stderrs[*k] * stderrs[*k])).collect()
            };
            weighted_slope(&xs, &ys, &ws).map(|s| -s)
        } else {
            None
        };
        let verdict = match fitted_order {
            _ if !monotone => Verdict::Fail,
            Some(p) if p >= bound_order - 0.1 => Verdict::Pass,
            Some(_) => Verdict::Fail,
            None => Verdict::Inconclusive,
        };
        let mut notes = Vec::new();
        if fitted_order.is_none() {
            notes.push(String::from("fewer than two errors above the noise floor; fit skipped"));
        }
        Ok(RateReport {
            n_values,
            errors,
            stderrs,
            noise_dominated: noise,
            fitted_order,
            bound_order,
            reference_orders,
            monotone,
            verdict,
            notes,
        })
    }
}

/// Scalar observable of the macroscopic state.
pub type ObservableFn<'a> = dyn Fn(&[f64]) -> f64 + Sync + 'a;

/// How the deterministic side of an experiment is obtained.
pub enum LimitSide<'a> {
    /// Integrate the kinetic equation from the discretized initial state.
    Integrate(Stepper),
    /// Closed form `g(X_t(x0))` as a function of the initial state.
    Exact(&'a (dyn Fn(&[f64]) -> f64 + Sync)),
}

/// Occupation numbers for population size `n` approximating `x`: each
/// simplex block is rounded on its own lattice (class sizes follow the
/// class fractions).
pub fn initial_counts(dynamics: &Dynamics, x: &[f64], n: u64) -> Result<OccupationState> {
    let blocks = dynamics.simplex_blocks();
    if blocks.is_empty() {
        return Err(Error::Unsupported("fixed-population experiments need a simplex model".into()));
    }
    if x.len() != dynamics.state_dim() {
        return Err(Error::input("initial state has the wrong dimension"));
    }
    let mut counts = alloc::vec![0u64; x.len()];
    let fractions: Vec<f64> = match dynamics {
        Dynamics::Multiclass { classes, .. } if classes.comm_mode == CommMode::NoCommunication => {
            classes.class_fractions.clone()
        }
        _ => alloc::vec![1.0],
    };
    let sizes = lattice_counts(&fractions, n)?;
    for ((start, len), size) in blocks.into_iter().zip(sizes) {
        if size == 0 {
            continue;
        }
        let c = lattice_counts(&x[start..start + len], size)?;
        counts[start..start + len].copy_from_slice(&c);
    }
    OccupationState::population(counts)
}

fn limit_value(
    side: &LimitSide<'_>,
    dynamics: &Dynamics,
    principal: &PrincipalModel,
    x0: &[f64],
    t: f64,
    g: &ObservableFn<'_>,
) -> Result<f64> {
    match side {
        LimitSide::Integrate(stepper) => {
            let (x, _) = integrate_final(dynamics, x0, principal, t, *stepper)?;
            Ok(g(&x))
        }
        LimitSide::Exact(f) => Ok(f(x0)),
    }
}

/// `|E g(X_N(t, x(N))) - g(X_t(x(N)))|` for each `N`.
#[allow(clippy::too_many_arguments)]
pub fn lln_experiment(
    dynamics: &Dynamics,
    x: &[f64],
    principal: &PrincipalModel,
    g: &ObservableFn<'_>,
    t: f64,
    n_values: &[u64],
    n_runs: usize,
    master_seed: u64,
    regularity: Regularity,
    limit: LimitSide<'_>,
    executor: &dyn Executor,
) -> Result<RateReport> {
    let mut errors = Vec::with_capacity(n_values.len());
    let mut stderrs = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let start = initial_counts(dynamics, x, n)?;
        let x_n = dynamics.observe(start.counts(), start.scale());
        let reference = limit_value(&limit, dynamics, principal, &x_n, t, g)?;
        let stats = ensemble_mean(dynamics, &start, principal, t, g, n_runs, mix_seed(master_seed, n), executor)?;
        errors.push((stats.mean - reference).abs());
        stderrs.push(stats.std_error);
    }
    RateReport::from_points(
        n_values.to_vec(),
        errors,
        stderrs,
        simplex_bound_order(regularity),
        alloc::vec![simplex_bound_order(Regularity::Smooth), simplex_bound_order(Regularity::Lipschitz)],
    )
}

/// `|V_n^N(x(N)) - V_n(x)|` at the probe node for each `N`. The chain side
/// applies the Monte-Carlo Bellman operator `n` times.
#[allow(clippy::too_many_arguments)]
pub fn value_convergence_experiment(
    dynamics: &Dynamics,
    principal: &PrincipalModel,
    v0: &ValueTable,
    n: usize,
    opts: &ShapleyOptions,
    probe_node: usize,
    n_values: &[u64],
    n_runs: usize,
    master_seed: u64,
    executor: &dyn Executor,
) -> Result<RateReport> {
    if probe_node >= v0.len() {
        return Err(Error::input("probe node outside the value grid"));
    }
    let limit = value_iterate(v0, n, dynamics, principal, opts)?.value.values()[probe_node];
    let mut errors = Vec::with_capacity(n_values.len());
    let mut stderrs = Vec::with_capacity(n_values.len());
    for &agents in n_values {
        let mut table = v0.clone();
        let mut se = 0.0;
        for step in 0..n {
            let seed = mix_seed(mix_seed(master_seed, agents), step as u64);
            let sweep = shapley_apply_markov(&table, dynamics, principal, opts, agents, n_runs, seed, executor)?;
            se = sweep.std_errors[probe_node];
            table = sweep.value;
        }
        errors.push((table.values()[probe_node] - limit).abs());
        stderrs.push(se);
    }
    RateReport::from_points(n_values.to_vec(), errors, stderrs, 1.0 / 3.0, alloc::vec![1.0 / 3.0])
}

/// Countable-state version of [`lln_experiment`] over density units `h`;
/// sizes are reported as `N = 1/h`.
#[allow(clippy::too_many_arguments)]
pub fn growth_lln_experiment(
    dynamics: &Dynamics,
    x: &[f64],
    principal: &PrincipalModel,
    g: &ObservableFn<'_>,
    t: f64,
    h_values: &[f64],
    n_runs: usize,
    master_seed: u64,
    regularity: Regularity,
    smooth_rates: bool,
    limit: LimitSide<'_>,
    executor: &dyn Executor,
) -> Result<RateReport> {
    if dynamics.is_simplex() {
        return Err(Error::Unsupported("use lln_experiment for fixed-population models".into()));
    }
    let mut errors = Vec::with_capacity(h_values.len());
    let mut stderrs = Vec::with_capacity(h_values.len());
    let mut sizes = Vec::with_capacity(h_values.len());
    let mut invalid = Vec::new();
    for &h in h_values {
        if !(h > 0.0) {
            return Err(Error::config("density unit h must be positive"));
        }
        let counts: Vec<u64> = x.iter().map(|v| libm::round(v.max(0.0) / h) as u64).collect();
        let start = OccupationState::new(counts, h)?;
        let x_h = start.densities();
        let reference = limit_value(&limit, dynamics, principal, &x_h, t, g)?;
        let n = libm::round(1.0 / h) as u64;
        let stats = ensemble_mean(dynamics, &start, principal, t, g, n_runs, mix_seed(master_seed, n), executor)?;
        if stats.blocked_rate_max * t >= 1e-3 * start.mass() as f64 {
            invalid.push(n);
        }
        errors.push((stats.mean - reference).abs());
        stderrs.push(stats.std_error);
        sizes.push(n);
    }
    let mut report = RateReport::from_points(
        sizes,
        errors,
        stderrs,
        countable_bound_order(regularity, smooth_rates),
        alloc::vec![
            countable_bound_order(Regularity::Smooth, smooth_rates),
            countable_bound_order(Regularity::Lipschitz, smooth_rates),
        ],
    )?;
    if !invalid.is_empty() {
        report.verdict = Verdict::Invalid;
        report.notes.push(alloc::format!(
            "truncation suppressed more than 1e-3 of the initial mass at N = {invalid:?}"
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_power_law_passes() {
        let n = alloc::vec![50, 200, 800, 3200];
        let e: Vec<f64> = n.iter().map(|k| 1.0 / libm::sqrt(*k as f64)).collect();
        let r = RateReport::from_points(n, e, alloc::vec![1e-4; 4], 1.0 / 3.0, alloc::vec![]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.fitted_order.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn noise_floor_skips_fit() {
        let r = RateReport::from_points(alloc::vec![10, 20], alloc::vec![0.0, 0.0], alloc::vec![0.0, 0.0], 0.5, alloc::vec![])
            .unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.noise_dominated.iter().all(|b| *b));
    }

    #[test]
    fn growth_is_a_failure() {
        let r = RateReport::from_points(alloc::vec![10, 100], alloc::vec![0.01, 0.1], alloc::vec![1e-4, 1e-4], 0.5, alloc::vec![])
            .unwrap();
        assert!(!r.monotone);
        assert_eq!(r.verdict, Verdict::Fail);
    }
}
