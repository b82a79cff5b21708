use alloc::vec::Vec;

use crate::error::Result;
use crate::grid::linspace;
use crate::math::sup_distance;
use crate::model::{ControlBox, PrincipalReward};

const TOL: f64 = 1e-10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;
const FALLBACK_POINTS: usize = 101;
const MAX_SWEEPS: usize = 200;

/// `argmax_b B(x, b)` over the control box by cyclic coordinate sweeps.
pub fn best_response(x: &[f64], reward: &PrincipalReward, control_box: &ControlBox) -> Result<Vec<f64>> {
    let mut b = control_box.center();
    let dim = b.len();
    for _ in 0..MAX_SWEEPS {
        let prev = b.clone();
        for a in 0..dim {
            let (lo, hi) = control_box.bounds()[a];
            let mut probe = b.clone();
            let best = maximize_on_interval(
                |t| {
                    probe[a] = t;
                    reward.eval(x, &probe)
                },
                lo,
                hi,
            )?;
            b[a] = best.0;
        }
        if dim <= 1 || sup_distance(&prev, &b) < TOL {
            break;
        }
    }
    Ok(b)
}

/// Maximizer and maximum of `f` on `[lo, hi]`.
///
/// Golden-section search is used when a three-point probe is consistent
/// with concavity; otherwise a uniform grid locates the best cell, which is
/// then refined. Both endpoints are always compared.
pub fn maximize_on_interval(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    if hi <= lo {
        return Ok((lo, f(lo)?));
    }
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    let mid = 0.5 * (lo + hi);
    let f_mid = f(mid)?;
    let slack = 1e-12 * (f_lo.abs() + f_hi.abs() + f_mid.abs()).max(1.0);
    let mut best = if f_mid >= 0.5 * (f_lo + f_hi) - slack {
        golden(&mut f, lo, hi)?
    } else {
        let grid = linspace(lo, hi, FALLBACK_POINTS);
        let mut arg = 0;
        let mut val = f64::NEG_INFINITY;
        for (i, t) in grid.iter().enumerate() {
            let v = f(*t)?;
            if v > val {
                val = v;
                arg = i;
            }
        }
        let a = grid[arg.saturating_sub(1)];
        let c = grid[(arg + 1).min(grid.len() - 1)];
        let refined = golden(&mut f, a, c)?;
        if refined.1 > val {
            refined
        } else {
            (grid[arg], val)
        }
    };
    for cand in [(mid, f_mid), (lo, f_lo), (hi, f_hi)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    Ok(best)
}

fn golden(f: &mut impl FnMut(f64) -> Result<f64>, mut a: f64, mut c: f64) -> Result<(f64, f64)> {
    let mut x1 = c - INV_PHI * (c - a);
    let mut x2 = a + INV_PHI * (c - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while c - a > TOL {
        if f1 >= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - INV_PHI * (c - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (c - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}
