//! Float helpers that work without `std`.

pub use libm::{exp, expm1, fabs, floor, log, pow, sqrt};

/// Sum-of-absolute-values norm.
pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| fabs(*a)).sum()
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| f64::max(m, fabs(*a)))
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| f64::max(m, fabs(x - y)))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// Clamp values in `[-tol, 0)` to zero and rescale so the entries sum to one.
///
/// Returns the absolute correction applied to the sum.
pub fn renormalize_simplex(x: &mut [f64], tol: f64) -> f64 {
    for v in x.iter_mut() {
        if *v < 0.0 && *v >= -tol {
            *v = 0.0;
        }
    }
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        for v in x.iter_mut() {
            *v /= s;
        }
    }
    fabs(s - 1.0)
}

/// Euclidean projection-free retraction onto the simplex used for table
/// lookups: negative entries are zeroed, then the vector is rescaled.
pub fn clamp_to_simplex(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 || v.is_nan() {
            *v = 0.0;
        }
    }
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        for v in x.iter_mut() {
            *v /= s;
        }
    } else if !x.is_empty() {
        let n = x.len() as f64;
        for v in x.iter_mut() {
            *v = 1.0 / n;
        }
    }
}

/// Ordinary or weighted least-squares slope of `y` against `x`.
pub fn weighted_slope(x: &[f64], y: &[f64], w: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() || x.len() != w.len() {
        return None;
    }
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return None;
    }
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..x.len() {
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    }
    if sxx <= 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
