use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::markov::{best_member, for_each_subset};
use crate::model::dynamics::strategy_marginal;
use crate::model::{
    coalition_rates, Attachment, ClassStructure, CommMode, Dynamics, GroupRate, GrowthCoefficients,
    KernelSpec, PayoffModel, RateKernel,
};

/// The model family whose limiting vector field is evaluated.
pub type DriftSpec = Dynamics;

/// `v_j = kappa x_j sum_i x_i (R_j - R_i)`.
pub fn drift_replicator(x: &[f64], payoff: &PayoffModel, b: &[f64], kappa: f64) -> Result<Vec<f64>> {
    let mut v = vec![0.0; x.len()];
    replicator_into(x, &payoff.rewards(x, b)?, kappa, &mut v);
    Ok(v)
}

fn replicator_into(x: &[f64], r: &[f64], kappa: f64, v: &mut [f64]) {
    for j in 0..x.len() {
        if x[j] == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for i in 0..x.len() {
            if i != j {
                acc += x[i] * (r[j] - r[i]);
            }
        }
        v[j] += kappa * x[j] * acc;
    }
}

/// Group interaction limit: every set `I` of `k` distinct strategies
/// contributes `kappa Pi(R_I) prod_I x` times `k e_win - sum_{i in I} e_i`,
/// where the winner is the best member (ties to the highest index).
pub fn drift_kth_order(
    x: &[f64],
    payoff: &PayoffModel,
    b: &[f64],
    kappa: f64,
    max_order: usize,
    group_rate: &GroupRate,
) -> Result<Vec<f64>> {
    let mut v = vec![0.0; x.len()];
    kth_order_into(x, payoff, b, kappa, max_order, group_rate, &mut v)?;
    Ok(v)
}

fn kth_order_into(
    x: &[f64],
    payoff: &PayoffModel,
    b: &[f64],
    kappa: f64,
    max_order: usize,
    group_rate: &GroupRate,
    v: &mut [f64],
) -> Result<()> {
    let r = payoff.rewards(x, b)?;
    let support: Vec<usize> = (0..x.len()).filter(|i| x[*i] != 0.0).collect();
    let mut members = Vec::new();
    let mut group_r = Vec::new();
    for k in 2..=max_order.min(support.len()) {
        for_each_subset(support.len(), k, |idx| {
            members.clear();
            members.extend(idx.iter().map(|p| support[*p]));
            group_r.clear();
            group_r.extend(members.iter().map(|i| r[*i]));
            let pi = group_rate.eval(&group_r);
            if pi == 0.0 {
                return;
            }
            let w = kappa * pi * members.iter().map(|i| x[*i]).product::<f64>();
            for &i in members.iter() {
                v[i] -= w;
            }
            v[best_member(&members, &r)] += k as f64 * w;
        });
    }
    Ok(())
}

/// Multi-class limit. Without communication each class block follows the
/// replicator field with prefactor `kappa_a omega_a`; with full
/// communication mass flows from `(i, beta)` to `(j, alpha)` at rate
/// `kappa_alpha x_ib x_ja (R^alpha_j - R^beta_i)^+`.
pub fn drift_multiclass(
    x: &[f64],
    payoffs: &[PayoffModel],
    b: &[f64],
    classes: &ClassStructure,
) -> Result<Vec<f64>> {
    let mut v = vec![0.0; x.len()];
    multiclass_into(x, payoffs, b, classes, &mut v)?;
    Ok(v)
}

fn multiclass_into(
    x: &[f64],
    payoffs: &[PayoffModel],
    b: &[f64],
    classes: &ClassStructure,
    v: &mut [f64],
) -> Result<()> {
    let a = classes.num_classes();
    if payoffs.len() != a {
        return Err(Error::config(alloc::format!(
            "{} class payoffs for {a} classes",
            payoffs.len()
        )));
    }
    let d = payoffs[0].strategies();
    if x.len() != a * d {
        return Err(Error::input(alloc::format!(
            "multiclass state has {} coordinates, expected {}",
            x.len(),
            a * d
        )));
    }
    match classes.comm_mode {
        CommMode::NoCommunication => {
            for (alpha, p) in payoffs.iter().enumerate() {
                let block = &x[alpha * d..(alpha + 1) * d];
                let r = p.rewards(block, b)?;
                let factor = classes.per_class_kappa[alpha] * classes.class_fractions[alpha];
                replicator_into(block, &r, factor, &mut v[alpha * d..(alpha + 1) * d]);
            }
        }
        CommMode::FullCommunication => {
            let m = strategy_marginal(x, d);
            let mut r = Vec::with_capacity(a * d);
            for p in payoffs {
                r.extend(p.rewards(&m, b)?);
            }
            for s in 0..a * d {
                if x[s] == 0.0 {
                    continue;
                }
                let mut acc = 0.0;
                for t in 0..a * d {
                    if t == s {
                        continue;
                    }
                    let gap = r[s] - r[t];
                    if gap > 0.0 {
                        acc += classes.per_class_kappa[s / d] * x[t] * gap;
                    } else if gap < 0.0 {
                        acc += classes.per_class_kappa[t / d] * x[t] * gap;
                    }
                }
                v[s] += x[s] * acc;
            }
        }
    }
    Ok(())
}

/// `f = sum_channels coefficient(x, b) * delta`. A channel is inactive when
/// it would produce an index past the truncation or consume from an empty
/// slot, matching the suppressed and clamped jumps of the chain.
pub fn drift_growth(x: &[f64], coeffs: &GrowthCoefficients, b: &[f64]) -> Result<Vec<f64>> {
    let mut v = vec![0.0; x.len()];
    growth_into(x, coeffs, b, &mut v)?;
    Ok(v)
}

fn growth_into(x: &[f64], coeffs: &GrowthCoefficients, b: &[f64], v: &mut [f64]) -> Result<()> {
    for c in &coeffs.channels {
        if c.term.max_index() >= x.len() || c.term.consumed().iter().any(|i| x[*i] <= 0.0) {
            continue;
        }
        let w = c.coefficient(x, b)?;
        if w == 0.0 {
            continue;
        }
        for (i, dv) in c.term.delta() {
            v[i] += w * dv as f64;
        }
    }
    Ok(())
}

/// Coagulation-fragmentation field on sizes `1..=J` (slot `k - 1`).
///
/// Returns the velocity and the rate at which mass leaves through merges
/// past the truncation (their gain terms are dropped, the losses kept).
pub fn drift_smoluchowski(x: &[f64], kernel: &KernelSpec, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut v = vec![0.0; x.len()];
    let lost = smoluchowski_into(x, kernel, b, &mut v)?;
    Ok((v, lost))
}

fn smoluchowski_into(x: &[f64], kernel: &KernelSpec, b: &[f64], v: &mut [f64]) -> Result<f64> {
    let jmax = x.len();
    let r = kernel.size_rewards(2 * jmax, x, b);
    let support: Vec<usize> = (1..=jmax).filter(|k| x[k - 1] != 0.0).collect();
    let mut lost = 0.0;
    for (p, &i) in support.iter().enumerate() {
        for &j in &support[p..] {
            let (c, _) = coalition_rates(i, j, x, b, kernel, &r)?;
            if c == 0.0 {
                continue;
            }
            let w = if i == j { c * x[i - 1] * x[i - 1] } else { 2.0 * c * x[i - 1] * x[j - 1] };
            v[i - 1] -= w;
            v[j - 1] -= w;
            if i + j <= jmax {
                v[i + j - 1] += w;
            } else {
                lost += (i + j) as f64 * w;
            }
        }
        if !matches!(kernel.split, RateKernel::Zero) {
            for j in 1..i {
                let (_, f) = coalition_rates(i, j, x, b, kernel, &r)?;
                let w = f * x[i - 1];
                v[i - 1] -= w;
                v[j - 1] += w;
                v[i - j - 1] += w;
            }
        }
    }
    if let Some(att) = &kernel.attach {
        attachment_into(x, att, b, v)?;
    }
    Ok(lost)
}

/// `v_1 += alpha lambda`, and `(1 - alpha) lambda k x_k` moves from size
/// `k` to `k + 1` for every `k < J`.
pub fn drift_attachment(x: &[f64], attach: &Attachment, b: &[f64]) -> Result<Vec<f64>> {
    let mut v = vec![0.0; x.len()];
    attachment_into(x, attach, b, &mut v)?;
    Ok(v)
}

fn attachment_into(x: &[f64], attach: &Attachment, b: &[f64], v: &mut [f64]) -> Result<()> {
    let lambda = attach.lambda.eval(x, b)?;
    if lambda == 0.0 {
        return Ok(());
    }
    v[0] += attach.alpha * lambda;
    for k in 1..x.len() {
        let w = (1.0 - attach.alpha) * lambda * k as f64 * x[k - 1];
        v[k - 1] -= w;
        v[k] += w;
    }
    Ok(())
}

/// Velocity of `dynamics` at `(x, b)`.
pub fn drift(dynamics: &Dynamics, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let mut v = vec![0.0; x.len()];
    drift_into(dynamics, x, b, &mut v)?;
    Ok(v)
}

/// Adds the velocity into `v` (which is zeroed first) and returns the rate
/// of mass lost through the truncation.
pub fn drift_into(dynamics: &Dynamics, x: &[f64], b: &[f64], v: &mut [f64]) -> Result<f64> {
    if x.len() != dynamics.state_dim() || v.len() != x.len() {
        return Err(Error::input(alloc::format!(
            "state has {} coordinates, model expects {}",
            x.len(),
            dynamics.state_dim()
        )));
    }
    v.iter_mut().for_each(|a| *a = 0.0);
    accumulate(dynamics, x, b, v)
}

fn accumulate(dynamics: &Dynamics, x: &[f64], b: &[f64], v: &mut [f64]) -> Result<f64> {
    match dynamics {
        Dynamics::Replicator { payoff, kappa } => {
            replicator_into(x, &payoff.rewards(x, b)?, *kappa, v);
            Ok(0.0)
        }
        Dynamics::KthOrder {
            payoff,
            kappa,
            max_order,
            group_rate,
        } => kth_order_into(x, payoff, b, *kappa, *max_order, group_rate, v).map(|_| 0.0),
        Dynamics::Multiclass { payoffs, classes } => {
            multiclass_into(x, payoffs, b, classes, v).map(|_| 0.0)
        }
        Dynamics::Growth { coeffs, .. } => growth_into(x, coeffs, b, v).map(|_| 0.0),
        Dynamics::Coalition { kernel, .. } => smoluchowski_into(x, kernel, b, v),
        Dynamics::Attachment { attach, .. } => attachment_into(x, attach, b, v).map(|_| 0.0),
        Dynamics::Composite(parts) => {
            let mut lost = 0.0;
            for p in parts {
                lost += accumulate(p, x, b, v)?;
            }
            Ok(lost)
        }
    }
}
