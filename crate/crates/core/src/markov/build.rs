use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::dynamics::strategy_marginal;
use crate::model::{
    coalition_rates, Attachment, ClassStructure, CommMode, Dynamics, GroupRate, GrowthCoefficients,
    KernelSpec, OccupationState, PayoffModel,
};
use crate::rng::Stream;

use super::transitions::TransitionList;

fn population(state: &OccupationState) -> Result<(u64, Vec<f64>)> {
    let n = state.total();
    if n == 0 {
        return Err(Error::input("no agents"));
    }
    let inv = 1.0 / n as f64;
    Ok((n, state.counts().iter().map(|c| *c as f64 * inv).collect()))
}

/// Pairwise imitation: an `i`-player switches to `j` at rate
/// `(kappa / N) n_i n_j (R_j - R_i)` whenever `R_j > R_i`.
pub fn build_pairwise(
    state: &OccupationState,
    payoff: &PayoffModel,
    b: &[f64],
    kappa: f64,
) -> Result<TransitionList> {
    let mut out = TransitionList::new();
    fill_pairwise(state, payoff, b, kappa, &mut out)?;
    Ok(out)
}

fn fill_pairwise(
    state: &OccupationState,
    payoff: &PayoffModel,
    b: &[f64],
    kappa: f64,
    out: &mut TransitionList,
) -> Result<()> {
    let (n, x) = population(state)?;
    let r = payoff.rewards(&x, b)?;
    pairwise_block(state.counts(), 0, &r, &r, kappa / n as f64, out);
    Ok(())
}

/// Pairs within the block starting at `offset`: source rewards `r_from`,
/// destination rewards `r_to`, rate `factor * n_i * n_j * gap`.
fn pairwise_block(
    counts: &[u64],
    offset: usize,
    r_from: &[f64],
    r_to: &[f64],
    factor: f64,
    out: &mut TransitionList,
) {
    let d = r_from.len();
    for i in 0..d {
        let ni = counts[offset + i];
        if ni == 0 {
            continue;
        }
        for j in 0..d {
            let nj = counts[offset + j];
            if i == j || nj == 0 || r_to[j] <= r_from[i] {
                continue;
            }
            let rate = factor * ni as f64 * nj as f64 * (r_to[j] - r_from[i]);
            out.push(counts, &[(offset + i, -1), (offset + j, 1)], rate);
        }
    }
}

/// Group imitation: every set `I` of `k` distinct occupied strategies
/// (`2 <= k <= max_order`) meets at rate `N kappa Pi(R_I) prod_{i in I} x_i`
/// and all members adopt the strategy of the best one (ties go to the
/// highest index).
pub fn build_kth_order(
    state: &OccupationState,
    payoff: &PayoffModel,
    b: &[f64],
    kappa: f64,
    max_order: usize,
    group_rate: &GroupRate,
) -> Result<TransitionList> {
    let mut out = TransitionList::new();
    fill_kth_order(state, payoff, b, kappa, max_order, group_rate, &mut out)?;
    Ok(out)
}

fn fill_kth_order(
    state: &OccupationState,
    payoff: &PayoffModel,
    b: &[f64],
    kappa: f64,
    max_order: usize,
    group_rate: &GroupRate,
    out: &mut TransitionList,
) -> Result<()> {
    let (n, x) = population(state)?;
    let r = payoff.rewards(&x, b)?;
    let occupied: Vec<usize> = (0..x.len()).filter(|i| state.counts()[*i] > 0).collect();
    let mut members = Vec::new();
    let mut group_r = Vec::new();
    let mut delta = Vec::new();
    for k in 2..=max_order.min(occupied.len()) {
        for_each_subset(occupied.len(), k, |idx| {
            members.clear();
            members.extend(idx.iter().map(|p| occupied[*p]));
            group_r.clear();
            group_r.extend(members.iter().map(|i| r[*i]));
            let pi = group_rate.eval(&group_r);
            if pi == 0.0 {
                return;
            }
            let winner = best_member(&members, &r);
            let prod: f64 = members.iter().map(|i| x[*i]).product();
            delta.clear();
            delta.extend(members.iter().map(|i| (*i, -1)));
            delta.push((winner, k as i64));
            out.push(state.counts(), &delta, n as f64 * kappa * pi * prod);
        });
    }
    Ok(())
}

/// Member with maximal reward; ties resolved toward the highest index.
pub(crate) fn best_member(members: &[usize], r: &[f64]) -> usize {
    let mut best = members[0];
    for &m in &members[1..] {
        if r[m] > r[best] || (r[m] == r[best] && m > best) {
            best = m;
        }
    }
    best
}

/// Calls `f` with every increasing `k`-subset of `0..n`.
pub(crate) fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut p = k;
        while p > 0 && idx[p - 1] == n - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            return;
        }
        idx[p - 1] += 1;
        for q in p..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Several classes sharing `d` strategies, states laid out class-major.
///
/// Without communication each class imitates internally at rate
/// `(kappa_a / N) n_ia n_ja (R^a_j - R^a_i)`, with payoffs evaluated at the
/// class-local frequencies. With full communication an agent moves from
/// `(i, beta)` to `(j, alpha)` at rate `(kappa_alpha / N) n_ib n_ja
/// (R^alpha_j - R^beta_i)`, payoffs evaluated at the strategy marginal.
pub fn build_multiclass(
    state: &OccupationState,
    payoffs: &[PayoffModel],
    b: &[f64],
    classes: &ClassStructure,
) -> Result<TransitionList> {
    let mut out = TransitionList::new();
    fill_multiclass(state, payoffs, b, classes, &mut out)?;
    Ok(out)
}

fn fill_multiclass(
    state: &OccupationState,
    payoffs: &[PayoffModel],
    b: &[f64],
    classes: &ClassStructure,
    out: &mut TransitionList,
) -> Result<()> {
    let a = classes.num_classes();
    if payoffs.len() != a {
        return Err(Error::config(alloc::format!(
            "{} class payoffs for {a} classes",
            payoffs.len()
        )));
    }
    let d = payoffs[0].strategies();
    if state.max_index() != a * d {
        return Err(Error::config(alloc::format!(
            "state has {} slots, expected {} classes x {d} strategies",
            state.max_index(),
            a
        )));
    }
    let counts = state.counts();
    let (n, x) = population(state)?;
    let inv_n = 1.0 / n as f64;
    match classes.comm_mode {
        CommMode::NoCommunication => {
            for (alpha, payoff) in payoffs.iter().enumerate() {
                let block = &counts[alpha * d..(alpha + 1) * d];
                let na: u64 = block.iter().sum();
                if na == 0 {
                    continue;
                }
                let xa: Vec<f64> = block.iter().map(|c| *c as f64 / na as f64).collect();
                let r = payoff.rewards(&xa, b)?;
                pairwise_block(counts, alpha * d, &r, &r, classes.per_class_kappa[alpha] * inv_n, out);
            }
        }
        CommMode::FullCommunication => {
            let m = strategy_marginal(&x, d);
            let mut r = Vec::with_capacity(a * d);
            for p in payoffs {
                r.extend(p.rewards(&m, b)?);
            }
            for from in 0..a * d {
                let nf = counts[from];
                if nf == 0 {
                    continue;
                }
                for to in 0..a * d {
                    let nt = counts[to];
                    if to == from || nt == 0 || r[to] <= r[from] {
                        continue;
                    }
                    let kappa = classes.per_class_kappa[to / d];
                    let rate = kappa * inv_n * nf as f64 * nt as f64 * (r[to] - r[from]);
                    out.push(counts, &[(from, -1), (to, 1)], rate);
                }
            }
        }
    }
    Ok(())
}

/// One entry per growth channel at rate `coefficient(x, b) / h`.
pub fn build_growth(
    state: &OccupationState,
    coeffs: &GrowthCoefficients,
    b: &[f64],
) -> Result<TransitionList> {
    let mut out = TransitionList::new();
    fill_growth(state, coeffs, b, &mut out)?;
    Ok(out)
}

fn fill_growth(
    state: &OccupationState,
    coeffs: &GrowthCoefficients,
    b: &[f64],
    out: &mut TransitionList,
) -> Result<()> {
    let x = state.densities();
    let h = state.scale();
    for c in &coeffs.channels {
        let v = c.coefficient(&x, b)?;
        if v > 0.0 {
            out.push(state.counts(), &c.term.delta(), v / h);
        }
    }
    Ok(())
}

/// Coalition merging and splitting (slot `k` holds coalitions of size `k+1`).
///
/// Distinct sizes `i != j` merge at rate `2 C_ij x_i x_j / h`, equal sizes at
/// `C_ii x_i (x_i - h) / h`; a size-`i` coalition splits into `(j, i - j)` at
/// rate `F_ij x_i / h` for every `j < i`. Attachment, when configured on the
/// kernel, is added on top.
pub fn build_coalition(
    state: &OccupationState,
    kernel: &KernelSpec,
    b: &[f64],
) -> Result<TransitionList> {
    let mut out = TransitionList::new();
    fill_coalition(state, kernel, b, &mut out)?;
    Ok(out)
}

fn fill_coalition(
    state: &OccupationState,
    kernel: &KernelSpec,
    b: &[f64],
    out: &mut TransitionList,
) -> Result<()> {
    let counts = state.counts();
    let jmax = counts.len();
    let h = state.scale();
    let x = state.densities();
    let r = kernel.size_rewards(2 * jmax, &x, b);
    let occupied: Vec<usize> = (1..=jmax).filter(|k| counts[k - 1] > 0).collect();
    for (p, &i) in occupied.iter().enumerate() {
        for &j in &occupied[p..] {
            let (c, _) = coalition_rates(i, j, &x, b, kernel, &r)?;
            if c == 0.0 {
                continue;
            }
            let rate = if i == j {
                if counts[i - 1] < 2 {
                    continue;
                }
                c * x[i - 1] * (x[i - 1] - h) / h
            } else {
                2.0 * c * x[i - 1] * x[j - 1] / h
            };
            out.push(counts, &[(i - 1, -1), (j - 1, -1), (i + j - 1, 1)], rate);
        }
        if !matches!(kernel.split, crate::model::RateKernel::Zero) {
            for j in 1..i {
                let (_, f) = coalition_rates(i, j, &x, b, kernel, &r)?;
                if f > 0.0 {
                    out.push(counts, &[(i - 1, -1), (j - 1, 1), (i - j - 1, 1)], f * x[i - 1] / h);
                }
            }
        }
    }
    if let Some(att) = &kernel.attach {
        fill_attachment(state, att, b, out)?;
    }
    Ok(())
}

/// Entrants found a new coalition at rate `alpha lambda / h` or join a
/// size-`k` coalition at rate `(1 - alpha) lambda k x_k / h`.
pub fn build_attachment(
    state: &OccupationState,
    attach: &Attachment,
    b: &[f64],
) -> Result<TransitionList> {
    let mut out = TransitionList::new();
    fill_attachment(state, attach, b, &mut out)?;
    Ok(out)
}

fn fill_attachment(
    state: &OccupationState,
    attach: &Attachment,
    b: &[f64],
    out: &mut TransitionList,
) -> Result<()> {
    let counts = state.counts();
    let h = state.scale();
    let x = state.densities();
    let lambda = attach.lambda.eval(&x, b)?;
    if lambda == 0.0 {
        return Ok(());
    }
    out.push(counts, &[(0, 1)], attach.alpha * lambda / h);
    if attach.alpha < 1.0 {
        for k in 1..=counts.len() {
            if counts[k - 1] > 0 {
                let rate = (1.0 - attach.alpha) * lambda * k as f64 * x[k - 1] / h;
                out.push(counts, &[(k - 1, -1), (k, 1)], rate);
            }
        }
    }
    Ok(())
}

/// Refill `out` with the outgoing jumps of `state` under `dynamics`.
pub fn transitions(
    dynamics: &Dynamics,
    state: &OccupationState,
    b: &[f64],
    out: &mut TransitionList,
) -> Result<()> {
    out.clear();
    append(dynamics, state, b, out)
}

fn append(
    dynamics: &Dynamics,
    state: &OccupationState,
    b: &[f64],
    out: &mut TransitionList,
) -> Result<()> {
    if state.max_index() != dynamics.state_dim() {
        return Err(Error::config(alloc::format!(
            "state has {} slots, model expects {}",
            state.max_index(),
            dynamics.state_dim()
        )));
    }
    match dynamics {
        Dynamics::Replicator { payoff, kappa } => fill_pairwise(state, payoff, b, *kappa, out),
        Dynamics::KthOrder {
            payoff,
            kappa,
            max_order,
            group_rate,
        } => fill_kth_order(state, payoff, b, *kappa, *max_order, group_rate, out),
        Dynamics::Multiclass { payoffs, classes } => fill_multiclass(state, payoffs, b, classes, out),
        Dynamics::Growth { coeffs, .. } => fill_growth(state, coeffs, b, out),
        Dynamics::Coalition { kernel, .. } => fill_coalition(state, kernel, b, out),
        Dynamics::Attachment { attach, .. } => fill_attachment(state, attach, b, out),
        Dynamics::Composite(parts) => {
            for p in parts {
                append(p, state, b, out)?;
            }
            Ok(())
        }
    }
}

/// Discrete-time attachment operator: `E V(next state)` where one entrant
/// founds a coalition with probability `alpha` or joins an existing one with
/// probability proportional to its size, `k n_k / sum_l l n_l`.
pub fn discrete_attachment_expectation(
    state: &OccupationState,
    alpha: f64,
    v: impl Fn(&OccupationState) -> f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for (delta, p) in discrete_attachment_moves(state, alpha)? {
        let mut next = state.clone();
        next.apply(&delta)?;
        acc += p * v(&next);
    }
    Ok(acc)
}

/// One step of the discrete-time attachment chain.
pub fn discrete_attachment_step(
    state: &mut OccupationState,
    alpha: f64,
    rng: &mut Stream,
) -> Result<()> {
    let moves = discrete_attachment_moves(state, alpha)?;
    let u = rng.uniform();
    let mut acc = 0.0;
    for (delta, p) in &moves {
        acc += p;
        if u < acc {
            return state.apply(delta);
        }
    }
    match moves.last() {
        Some((delta, _)) => state.apply(delta),
        None => Ok(()),
    }
}

/// Candidate jumps of one attachment step with their probabilities.
type Moves = Vec<(Vec<(usize, i64)>, f64)>;

fn discrete_attachment_moves(state: &OccupationState, alpha: f64) -> Result<Moves> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::config(alloc::format!("attachment alpha {alpha} outside [0,1]")));
    }
    let counts = state.counts();
    let jmax = counts.len();
    let mass = state.mass() as f64;
    let mut moves = Vec::new();
    if alpha > 0.0 || mass == 0.0 {
        moves.push((vec![(0usize, 1i64)], if mass == 0.0 { 1.0 } else { alpha }));
    }
    if mass > 0.0 && alpha < 1.0 {
        for k in 1..jmax {
            if counts[k - 1] > 0 {
                let p = (1.0 - alpha) * k as f64 * counts[k - 1] as f64 / mass;
                moves.push((vec![(k - 1, -1), (k, 1)], p));
            }
        }
        if counts[jmax - 1] > 0 {
            return Err(Error::input(
                "discrete attachment would grow a coalition past the truncation",
            ));
        }
    }
    Ok(moves)
}
