//! Rest points of the replicator-type kinetic equations and approximate
//! Nash equilibria of the finite game.
//!
//! `x` is a rest point exactly when all strategies in its support earn the
//! same payoff at `b*(x)`. For each candidate zero set `I` the solver looks
//! for points with `x_k = 0` on `I` and equal payoffs elsewhere.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kinetic::drift_replicator;
use crate::math::sup_distance;
use crate::model::{PayoffModel, PrincipalModel};
use crate::rng::{mix_seed, Stream};

/// Coordinates below this are treated as zero.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Largest payoff-equation residual accepted from the solver.
const ACCEPT_RESIDUAL: f64 = 1e-9;
const DEDUP_DISTANCE: f64 = 1e-6;
const MAX_HALVINGS: usize = 40;
const MAX_NEWTON: usize = 100;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquilibriumRecord {
    pub x: Vec<f64>,
    /// Strategies with `x_k >= SUPPORT_TOL`.
    pub support: Vec<usize>,
    /// `max_j |drift_j(x)|`.
    pub residual: f64,
    /// Largest payoff gap within the support at `b*(x)`.
    pub payoff_spread: f64,
    /// Off-support payoffs do not exceed on-support ones.
    pub dominant: bool,
    pub control: Vec<f64>,
    pub nash_eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    pub starts: usize,
    pub seed: u64,
    pub support_tol: f64,
    pub kappa: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            starts: 32,
            seed: 0,
            support_tol: SUPPORT_TOL,
            kappa: 1.0,
        }
    }
}

/// `max_j |drift_replicator(x)_j|` at `b*(x)`.
pub fn residual(x: &[f64], payoff: &PayoffModel, principal: &PrincipalModel, kappa: f64) -> Result<f64> {
    let b = principal.control(x, 0.0)?;
    let v = drift_replicator(x, payoff, &b, kappa)?;
    Ok(crate::math::sup_norm(&v))
}

fn record(x: Vec<f64>, payoff: &PayoffModel, principal: &PrincipalModel, opts: &SolverOptions) -> Result<EquilibriumRecord> {
    let b = principal.control(&x, 0.0)?;
    let r = payoff.rewards(&x, &b)?;
    let support: Vec<usize> = (0..x.len()).filter(|k| x[*k] >= opts.support_tol).collect();
    let (lo, hi) = support
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(r[*k]), hi.max(r[*k])));
    let off_max = (0..x.len())
        .filter(|k| x[*k] < opts.support_tol)
        .map(|k| r[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let res = crate::math::sup_norm(&drift_replicator(&x, payoff, &b, opts.kappa)?);
    Ok(EquilibriumRecord {
        support,
        residual: res,
        payoff_spread: hi - lo,
        dominant: off_max <= lo + ACCEPT_RESIDUAL,
        control: b,
        nash_eps: None,
        x,
    })
}

/// Rest points with zero set `zero_set` (a proper subset of the strategies),
/// from `opts.starts` random interior starts of damped Newton.
pub fn find_fixed_points(
    payoff: &PayoffModel,
    principal: &PrincipalModel,
    zero_set: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<EquilibriumRecord>> {
    let d = payoff.strategies();
    let support: Vec<usize> = (0..d).filter(|k| !zero_set.contains(k)).collect();
    if support.is_empty() || zero_set.iter().any(|k| *k >= d) {
        return Err(Error::input("zero set must be a proper subset of the strategies"));
    }
    let embed = |z: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; d];
        for (k, s) in support.iter().enumerate() {
            x[*s] = z[k];
        }
        x
    };
    let system = |z: &[f64]| -> Result<Vec<f64>> {
        if z.iter().any(|v| *v < -1e-12 || !v.is_finite()) {
            return Err(Error::input("left the simplex"));
        }
        let x = embed(z);
        let b = principal.control(&x, 0.0)?;
        let r = payoff.rewards(&x, &b)?;
        let mut f: Vec<f64> = support[1..].iter().map(|j| r[*j] - r[support[0]]).collect();
        f.push(z.iter().sum::<f64>() - 1.0);
        Ok(f)
    };
    let mask = support.iter().fold(0u64, |m, s| m | 1 << s);
    let mut rng = Stream::new(mix_seed(opts.seed, mask));
    let mut found: Vec<EquilibriumRecord> = Vec::new();
    let starts = if support.len() == 1 { 1 } else { opts.starts };
    for _ in 0..starts {
        let z0 = dirichlet(&mut rng, support.len());
        let Some(z) = newton(&system, z0) else { continue };
        let mut x = embed(&z);
        for v in x.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let rec = record(x, payoff, principal, opts)?;
        if rec.residual >= ACCEPT_RESIDUAL {
            continue;
        }
        if found.iter().all(|f| sup_distance(&f.x, &rec.x) > DEDUP_DISTANCE) {
            found.push(rec);
        }
    }
    Ok(found)
}

/// Sweep over every proper zero set, merging duplicates.
pub fn find_all(
    payoff: &PayoffModel,
    principal: &PrincipalModel,
    opts: &SolverOptions,
) -> Result<Vec<EquilibriumRecord>> {
    let d = payoff.strategies();
    if d > 16 {
        return Err(Error::Unsupported("support sweep limited to 16 strategies".into()));
    }
    let mut all: Vec<EquilibriumRecord> = Vec::new();
    for mask in 1u32..(1 << d) {
        let zero: Vec<usize> = (0..d).filter(|k| mask >> k & 1 == 0).collect();
        for rec in find_fixed_points(payoff, principal, &zero, opts)? {
            if all.iter().all(|f| sup_distance(&f.x, &rec.x) > DEDUP_DISTANCE) {
                all.push(rec);
            }
        }
    }
    Ok(all)
}

fn dirichlet(rng: &mut Stream, n: usize) -> Vec<f64> {
    let mut z: Vec<f64> = (0..n).map(|_| rng.unit_exponential()).collect();
    let s: f64 = z.iter().sum();
    z.iter_mut().for_each(|v| *v /= s);
    z
}

fn newton(f: &impl Fn(&[f64]) -> Result<Vec<f64>>, mut z: Vec<f64>) -> Option<Vec<f64>> {
    let n = z.len();
    let mut fz = f(&z).ok()?;
    for _ in 0..MAX_NEWTON {
        let norm = crate::math::sup_norm(&fz);
        if norm < 1e-13 {
            return Some(z);
        }
        let mut jac = vec![vec![0.0; n]; n];
        for c in 0..n {
            let h = 1e-7;
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[c] += h;
            zm[c] -= h;
            let (fp, fm, span) = match (f(&zp), f(&zm)) {
                (Ok(fp), Ok(fm)) => (fp, fm, 2.0 * h),
                (Ok(fp), Err(_)) => (fp, fz.clone(), h),
                (Err(_), Ok(fm)) => (fz.clone(), fm, h),
                _ => return None,
            };
            for r in 0..n {
                jac[r][c] = (fp[r] - fm[r]) / span;
            }
        }
        let step = solve(jac, fz.iter().map(|v| -v).collect())?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = z.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            if let Ok(ft) = f(&trial) {
                if crate::math::sup_norm(&ft) < norm {
                    z = trial;
                    fz = ft;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return (norm < ACCEPT_RESIDUAL).then_some(z);
        }
    }
    (crate::math::sup_norm(&fz) < ACCEPT_RESIDUAL).then_some(z)
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|i, j| a[*i][col].abs().total_cmp(&a[*j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let m = a[r][col] / a[col][col];
            if m != 0.0 {
                for c in col..n {
                    a[r][c] -= m * a[col][c];
                }
                b[r] -= m * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Occupation numbers of the lattice point nearest `x` with denominator
/// `n`: largest-remainder rounding, ties giving the extra unit to the lower
/// index. Every coordinate moves by less than `1/n`.
pub fn lattice_counts(x: &[f64], n: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::input("lattice denominator must be positive"));
    }
    if x.iter().any(|v| !v.is_finite() || *v < -crate::model::TOL_POS) {
        return Err(Error::input("point is not on the simplex"));
    }
    let scaled: Vec<f64> = x.iter().map(|v| v.max(0.0) * n as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|s| libm::floor(*s) as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let extra = n.saturating_sub(assigned) as usize;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|a, b| {
        let ra = scaled[*a] - counts[*a] as f64;
        let rb = scaled[*b] - counts[*b] as f64;
        rb.total_cmp(&ra).then(a.cmp(b))
    });
    for k in order.into_iter().take(extra) {
        counts[k] += 1;
    }
    let total: u64 = counts.iter().sum();
    if total != n {
        return Err(Error::input(alloc::format!(
            "point does not sum to one (lattice total {total}, expected {n})"
        )));
    }
    Ok(counts)
}

/// `x_N` in `Σ_d ∩ Z^d / N` within `1/N` of `x` in every coordinate.
pub fn rational_approximation(x: &[f64], n: u64) -> Result<Vec<f64>> {
    Ok(lattice_counts(x, n)?
        .into_iter()
        .map(|c| c as f64 / n as f64)
        .collect())
}

/// Smallest `eps` such that no single agent of the `n`-player game gains
/// more than `eps` by switching strategy, with the principal at `b*(x_N)`.
pub fn check_epsilon_nash(x_n: &[f64], n: u64, payoff: &PayoffModel, principal: &PrincipalModel) -> Result<f64> {
    if n == 0 {
        return Err(Error::input("population size must be positive"));
    }
    let nf = n as f64;
    for (j, v) in x_n.iter().enumerate() {
        let c = v * nf;
        if (c - libm::round(c)).abs() > 1e-9 || c < -1e-9 {
            return Err(Error::input(alloc::format!(
                "coordinate {j} times N is {c}, not a non-negative integer"
            )));
        }
    }
    let b = principal.control(x_n, 0.0)?;
    let r = payoff.rewards(x_n, &b)?;
    let mut eps: f64 = 0.0;
    let mut y = x_n.to_vec();
    for i in 0..x_n.len() {
        if libm::round(x_n[i] * nf) < 1.0 {
            continue;
        }
        for j in 0..x_n.len() {
            if j == i {
                continue;
            }
            y.copy_from_slice(x_n);
            y[i] -= 1.0 / nf;
            y[j] += 1.0 / nf;
            eps = eps.max(payoff.reward(j, &y, &b)? - r[i]);
        }
    }
    Ok(eps)
}

/// Numerical bound `R̂` on `|dR_j / dy_a|` over the simplex, where
/// `y = (x_1, .., x_{d-1})` are the free coordinates, probed with 101 points
/// per axis and inflated by 5%.
pub fn lipschitz_estimate(payoff: &PayoffModel, principal: &PrincipalModel) -> Result<f64> {
    const PROBE: usize = 101;
    const BASES: usize = 11;
    let d = payoff.strategies();
    if d < 2 {
        return Ok(0.0);
    }
    let free = d - 1;
    let eval = |y: &[f64]| -> Result<Vec<f64>> {
        let mut x = y.to_vec();
        x.push((1.0 - y.iter().sum::<f64>()).max(0.0));
        let b = principal.control(&x, 0.0)?;
        payoff.rewards(&x, &b)
    };
    let mut best: f64 = 0.0;
    for axis in 0..free {
        let others = free - 1;
        let n_bases = BASES.pow(others as u32);
        for base in 0..n_bases {
            let mut y = vec![0.0; free];
            let mut rest = base;
            let mut used = 0.0;
            for k in (0..free).filter(|k| *k != axis) {
                y[k] = (rest % BASES) as f64 / (BASES - 1) as f64;
                rest /= BASES;
                used += y[k];
            }
            if used > 1.0 + 1e-12 {
                continue;
            }
            let span = 1.0 - used;
            if span <= 0.0 {
                continue;
            }
            let mut prev: Option<(f64, Vec<f64>)> = None;
            for p in 0..PROBE {
                let t = span * p as f64 / (PROBE - 1) as f64;
                y[axis] = t;
                let r = eval(&y)?;
                if let Some((tp, rp)) = &prev {
                    for (a, c) in r.iter().zip(rp) {
                        best = best.max((a - c).abs() / (t - tp));
                    }
                }
                prev = Some((t, r));
            }
        }
    }
    Ok(1.05 * best)
}

/// A rest point of the dynamics with `b` held fixed, and the principal's
/// reward there.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TurnpikeCandidate {
    pub b: Vec<f64>,
    pub x: Vec<f64>,
    pub value: f64,
}

/// For every control on the grid, the rest points at that fixed control,
/// sorted by principal reward (highest first).
pub fn turnpike_scan(
    payoff: &PayoffModel,
    principal: &PrincipalModel,
    b_points: usize,
    opts: &SolverOptions,
) -> Result<Vec<TurnpikeCandidate>> {
    let mut out = Vec::new();
    for b in principal.control_box.grid(b_points) {
        let held = principal.holding(b.clone());
        for rec in find_all(payoff, &held, opts)? {
            let value = principal.reward.eval(&rec.x, &b)?;
            out.push(TurnpikeCandidate {
                b: b.clone(),
                x: rec.x,
                value,
            });
        }
    }
    out.sort_by(|a, b| b.value.total_cmp(&a.value));
    Ok(out)
}
