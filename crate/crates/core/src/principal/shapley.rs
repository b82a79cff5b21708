use alloc::vec::Vec;

use crate::equilibria::lattice_counts;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::kinetic::{flow, Stepper};
use crate::markov::ensemble_mean;
use crate::model::{ControlBox, Dynamics, OccupationState, PrincipalModel};
use crate::rng::mix_seed;

use super::best_response::maximize_on_interval;
use super::tables::{PolicyTable, ValueTable};

/// Discretization of one Bellman step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapleyOptions {
    /// Length of the interval on which `b` is held fixed.
    pub tau: f64,
    /// Control grid points per axis.
    pub b_points: usize,
    /// Golden-section refinement around the best grid control.
    pub refine: bool,
    pub stepper: Stepper,
}

impl ShapleyOptions {
    pub fn new(tau: f64) -> Self {
        ShapleyOptions {
            tau,
            b_points: 11,
            refine: true,
            stepper: Stepper::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config(alloc::format!("tau must be positive, got {}", self.tau)));
        }
        if self.b_points == 0 {
            return Err(Error::config("control grid needs at least one point"));
        }
        Ok(())
    }
}

/// Result of one Bellman sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub value: ValueTable,
    pub policy: PolicyTable,
}

/// Finite-horizon plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub value: ValueTable,
    /// Stage policies in time order: entry `k` acts on `[k tau, (k+1) tau)`.
    pub policies: Vec<PolicyTable>,
    /// Sup-norm change of the value table at each iteration.
    pub log: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedPlan {
    pub value: ValueTable,
    pub policy: PolicyTable,
    pub log: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlPlan {
    pub value: ValueTable,
    /// Stage policies for the rate `u`, in time order.
    pub policies: Vec<PolicyTable>,
    pub log: Vec<f64>,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSweep {
    pub value: ValueTable,
    pub policy: PolicyTable,
    /// Monte-Carlo standard error of the continuation at each node.
    pub std_errors: Vec<f64>,
}

/// Running reward `J(x, b, u)` of the rate-controlled problem.
pub type RunningReward<'a> = dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Sync + 'a;

fn check_table(v: &ValueTable, dynamics: &Dynamics, extra: usize) -> Result<()> {
    let d = dynamics.state_dim();
    if dynamics.simplex_blocks() != [(0, d)] {
        return Err(Error::Unsupported(
            "value tables cover single-simplex models only".into(),
        ));
    }
    if v.strategies() != d {
        return Err(Error::config(alloc::format!(
            "value table has {} strategies, model has {d}",
            v.strategies()
        )));
    }
    if v.extra_dims() != extra {
        return Err(Error::config(alloc::format!(
            "value table has {} control axes, expected {extra}",
            v.extra_dims()
        )));
    }
    Ok(())
}

fn node_error(node: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Node {
        node,
        source: alloc::boxed::Box::new(e),
    }
}

fn argmax_on_grid(
    candidates: &[Vec<f64>],
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<(Vec<f64>, f64)> {
    let mut best = (candidates[0].clone(), f64::NEG_INFINITY);
    for b in candidates {
        let v = objective(b)?;
        if v > best.1 {
            best = (b.clone(), v);
        }
    }
    Ok(best)
}

/// One coordinate sweep of golden-section refinement inside the grid cell
/// around `best`.
fn refine_around(
    best: (Vec<f64>, f64),
    control_box: &ControlBox,
    points: usize,
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<(Vec<f64>, f64)> {
    let (mut b, mut val) = best;
    for (a, (lo, hi)) in control_box.bounds().iter().enumerate() {
        if hi <= lo || points < 2 {
            continue;
        }
        let step = (hi - lo) / (points - 1) as f64;
        let l = (b[a] - step).max(*lo);
        let h = (b[a] + step).min(*hi);
        let mut probe = b.clone();
        let (t, v) = maximize_on_interval(
            |t| {
                probe[a] = t;
                objective(&probe)
            },
            l,
            h,
        )?;
        if v > val {
            b[a] = t;
            val = v;
        }
    }
    Ok((b, val))
}

fn bellman(
    v: &ValueTable,
    dynamics: &Dynamics,
    principal: &PrincipalModel,
    opts: &ShapleyOptions,
    discount: f64,
) -> Result<Sweep> {
    opts.validate()?;
    check_table(v, dynamics, 0)?;
    let candidates = principal.control_box.grid(opts.b_points);
    let mut values = Vec::with_capacity(v.len());
    let mut actions = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let (x, _) = v.node_state(i);
        let objective = |b: &[f64]| -> Result<f64> {
            let y = flow(dynamics, &x, b, opts.tau, opts.stepper)?;
            Ok(opts.tau * principal.reward.eval(&x, b)? + discount * v.value(&y, &[]))
        };
        let mut best = argmax_on_grid(&candidates, objective).map_err(node_error(i))?;
        if opts.refine {
            best = refine_around(best, &principal.control_box, opts.b_points, objective)
                .map_err(node_error(i))?;
        }
        values.push(best.1);
        actions.push(best.0);
    }
    Ok(Sweep {
        value: v.with_values(values)?,
        policy: PolicyTable::new(v.grid().clone(), v.strategies(), actions)?,
    })
}

/// `SV(x) = sup_b [tau B(x, b) + V(X(tau, x, b))]` at every node.
pub fn shapley_apply(
    v: &ValueTable,
    dynamics: &Dynamics,
    principal: &PrincipalModel,
    opts: &ShapleyOptions,
) -> Result<Sweep> {
    bellman(v, dynamics, principal, opts, 1.0)
}

/// `V_n = S^n V_0` with the stage policies.
pub fn value_iterate(
    v0: &ValueTable,
    n: usize,
    dynamics: &Dynamics,
    principal: &PrincipalModel,
    opts: &ShapleyOptions,
) -> Result<Plan> {
    let mut value = v0.clone();
    let mut policies = Vec::with_capacity(n);
    let mut log = Vec::with_capacity(n);
    for _ in 0..n {
        let sweep = shapley_apply(&value, dynamics, principal, opts)?;
        log.push(sweep.value.sup_distance(&value));
        value = sweep.value;
        policies.push(sweep.policy);
    }
    policies.reverse();
    Ok(Plan {
        value,
        policies,
        log,
    })
}

/// Fixed point of `V = sup_b [tau B + beta V(X(tau, ., b))]`, iterated from
/// `v0` until the sup-norm change drops below `tol (1 - beta)`.
pub fn discounted_value(
    v0: &ValueTable,
    dynamics: &Dynamics,
    principal: &PrincipalModel,
    beta: f64,
    opts: &ShapleyOptions,
    tol: f64,
    max_sweeps: usize,
) -> Result<DiscountedPlan> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::config(alloc::format!("discount factor {beta} outside (0, 1)")));
    }
    if !(tol > 0.0) {
        return Err(Error::config("tolerance must be positive"));
    }
    let mut value = v0.clone();
    let mut log: Vec<f64> = Vec::new();
    let mut streak = 0;
    for _ in 0..max_sweeps {
        let sweep = bellman(&value, dynamics, principal, opts, beta)?;
        let change = sweep.value.sup_distance(&value);
        let floor = 1e-12 * crate::math::sup_norm(sweep.value.values()).max(1.0);
        if let Some(prev) = log.last() {
            if change > (beta + 1e-6) * prev + floor {
                streak += 1;
            } else {
                streak = 0;
            }
        }
        if streak >= 3 {
            return Err(Error::numerical(
                alloc::format!("value iteration is not contracting (ratio {} > beta {beta})", change / log[log.len() - 1]),
                sweep.value.values(),
            ));
        }
        log.push(change);
        value = sweep.value;
        if change < tol * (1.0 - beta) {
            return Ok(DiscountedPlan {
                value,
                policy: sweep.policy,
                log,
            });
        }
    }
    Err(Error::numerical(
        alloc::format!("discounted value iteration did not converge in {max_sweeps} sweeps"),
        value.values(),
    ))
}

/// Backward recursion for the rate-controlled problem on the joint `(x, b)`
/// grid of `v0 = S_T`: `V(x, b) = max_u [tau J(x, b, u) + V(X(tau, x, b),
/// clamp(b + u tau))]` with `tau = (t_final - t) / n`.
#[allow(clippy::too_many_arguments)]
pub fn control_value_iterate(
    v0: &ValueTable,
    n: usize,
    t: f64,
    t_final: f64,
    running: &RunningReward<'_>,
    u_box: &ControlBox,
    u_points: usize,
    dynamics: &Dynamics,
    principal: &PrincipalModel,
    stepper: Stepper,
) -> Result<ControlPlan> {
    let r = principal.control_box.dim();
    check_table(v0, dynamics, r)?;
    if n > 0 && !(t_final > t) {
        return Err(Error::config("control horizon must satisfy T > t"));
    }
    if u_box.dim() != r || u_points == 0 {
        return Err(Error::config("rate box must match the control dimension"));
    }
    let tau = if n == 0 { 0.0 } else { (t_final - t) / n as f64 };
    let candidates = u_box.grid(u_points);
    let mut value = v0.clone();
    let mut policies = Vec::with_capacity(n);
    let mut log = Vec::with_capacity(n);
    for _ in 0..n {
        let mut values = Vec::with_capacity(value.len());
        let mut actions = Vec::with_capacity(value.len());
        for i in 0..value.len() {
            let (x, b) = value.node_state(i);
            let y = flow(dynamics, &x, &b, tau, stepper).map_err(node_error(i))?;
            let (u, v) = argmax_on_grid(&candidates, |u| {
                let mut next: Vec<f64> = b.iter().zip(u).map(|(bk, uk)| bk + uk * tau).collect();
                principal.control_box.clamp(&mut next);
                Ok(tau * running(&x, &b, u) + value.value(&y, &next))
            })?;
            if !v.is_finite() {
                return Err(node_error(i)(Error::numerical("non-finite stage value", &x)));
            }
            values.push(v);
            actions.push(u);
        }
        let next = value.with_values(values)?;
        log.push(next.sup_distance(&value));
        policies.push(PolicyTable::new(value.grid().clone(), value.strategies(), actions)?);
        value = next;
    }
    policies.reverse();
    Ok(ControlPlan {
        value,
        policies,
        log,
        tau,
    })
}

/// Monte-Carlo Bellman operator of the `n_agents` chain:
/// `sup_b [tau B(x_N, b) + E V(X_N(tau, x_N, b))]` with `x_N` the lattice
/// point nearest each node.
#[allow(clippy::too_many_arguments)]
pub fn shapley_apply_markov(
    v: &ValueTable,
    dynamics: &Dynamics,
    principal: &PrincipalModel,
    opts: &ShapleyOptions,
    n_agents: u64,
    n_runs: usize,
    seed: u64,
    executor: &dyn Executor,
) -> Result<MarkovSweep> {
    opts.validate()?;
    check_table(v, dynamics, 0)?;
    let candidates = principal.control_box.grid(opts.b_points);
    let mut values = Vec::with_capacity(v.len());
    let mut actions = Vec::with_capacity(v.len());
    let mut std_errors = Vec::with_capacity(v.len());
    let g = |y: &[f64]| v.value(y, &[]);
    for i in 0..v.len() {
        let (x, _) = v.node_state(i);
        let run = || -> Result<(Vec<f64>, f64, f64)> {
            let counts = lattice_counts(&x, n_agents)?;
            let x_n: Vec<f64> = counts.iter().map(|c| *c as f64 / n_agents as f64).collect();
            let start = OccupationState::population(counts)?;
            let node_seed = mix_seed(seed, i as u64);
            let mut best = (candidates[0].clone(), f64::NEG_INFINITY, 0.0);
            for (k, b) in candidates.iter().enumerate() {
                let held = principal.holding(b.clone());
                let stats = ensemble_mean(
                    dynamics,
                    &start,
                    &held,
                    opts.tau,
                    &g,
                    n_runs,
                    mix_seed(node_seed, k as u64),
                    executor,
                )?;
                let val = opts.tau * principal.reward.eval(&x_n, b)? + stats.mean;
                if val > best.1 {
                    best = (b.clone(), val, stats.std_error);
                }
            }
            Ok(best)
        };
        let (b, val, se) = run().map_err(node_error(i))?;
        values.push(val);
        actions.push(b);
        std_errors.push(se);
    }
    Ok(MarkovSweep {
        value: v.with_values(values)?,
        policy: PolicyTable::new(v.grid().clone(), v.strategies(), actions)?,
        std_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PayoffModel, PrincipalMode, PrincipalReward, TabularPayoff};

    fn flat_model() -> Dynamics {
        let p = PayoffModel::tabular(TabularPayoff::linear(alloc::vec![1.0, 1.0], None).unwrap());
        Dynamics::replicator(p, 1.0).unwrap()
    }

    fn principal(reward: PrincipalReward) -> PrincipalModel {
        PrincipalModel::new(reward, ControlBox::interval(0.0, 1.0).unwrap(), PrincipalMode::BestResponse)
            .unwrap()
    }

    #[test]
    fn zero_drift_adds_running_reward() {
        let reward = PrincipalReward::custom(|x, _| x[1]);
        let v0 = ValueTable::on_simplex(2, 5, |x| x[0] * x[0]).unwrap();
        let opts = ShapleyOptions::new(0.5);
        let plan = value_iterate(&v0, 3, &flat_model(), &principal(reward), &opts).unwrap();
        for i in 0..v0.len() {
            let (x, _) = v0.node_state(i);
            let expect = 3.0 * 0.5 * x[1] + v0.values()[i];
            assert!((plan.value.values()[i] - expect).abs() < 1e-12);
        }
        assert_eq!(plan.policies.len(), 3);
    }

    #[test]
    fn zero_iterations_return_v0() {
        let v0 = ValueTable::on_simplex(2, 3, |x| x[0]).unwrap();
        let plan = value_iterate(&v0, 0, &flat_model(), &principal(PrincipalReward::Constant(1.0)), &ShapleyOptions::new(1.0))
            .unwrap();
        assert_eq!(plan.value, v0);
    }

    #[test]
    fn constant_reward_discounted_series() {
        let v0 = ValueTable::on_simplex(2, 3, |_| 0.0).unwrap();
        let beta = 0.9;
        let plan = discounted_value(
            &v0,
            &flat_model(),
            &principal(PrincipalReward::Constant(2.0)),
            beta,
            &ShapleyOptions::new(0.5),
            1e-10,
            10_000,
        )
        .unwrap();
        for v in plan.value.values() {
            assert!((v - 0.5 * 2.0 / (1.0 - beta)).abs() < 1e-8);
        }
    }

    #[test]
    fn additive_shift() {
        let p = PayoffModel::tabular(TabularPayoff::linear(alloc::vec![0.0, 1.0], None).unwrap());
        let dy = Dynamics::replicator(p, 1.0).unwrap();
        let pr = principal(PrincipalReward::custom(|x, b| x[0] * b[0] - b[0] * b[0]));
        let v = ValueTable::on_simplex(2, 6, |x| x[1] * x[1]).unwrap();
        let w = v.with_values(v.values().iter().map(|a| a + 3.0).collect()).unwrap();
        let opts = ShapleyOptions::new(0.3);
        let sv = shapley_apply(&v, &dy, &pr, &opts).unwrap();
        let sw = shapley_apply(&w, &dy, &pr, &opts).unwrap();
        for (a, b) in sv.value.values().iter().zip(sw.value.values()) {
            assert!((b - a - 3.0).abs() < 1e-12);
        }
    }
}
