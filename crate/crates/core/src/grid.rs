//! Tensor-product grids with multilinear interpolation.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `n` evenly spaced points on `[lo, hi]`; a single point sits at the midpoint.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    axes: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        for (k, a) in axes.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::config(alloc::format!("grid axis {k} is empty")));
            }
            if a.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::config(alloc::format!(
                    "grid axis {k} is not strictly increasing"
                )));
            }
        }
        Ok(Grid { axes })
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major multi-index of a flat node index (last axis fastest).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = alloc::vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            let n = self.axes[k].len();
            idx[k] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (k, i) in idx.iter().enumerate() {
            flat = flat * self.axes[k].len() + i;
        }
        flat
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(k, i)| self.axes[k][*i])
            .collect()
    }

    /// Multilinear interpolation of node `values` at `point`; coordinates
    /// outside an axis range are clamped to it.
    pub fn interpolate(&self, values: &[f64], point: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let dims = self.axes.len();
        if dims == 0 {
            return values[0];
        }
        let mut cell = [0usize; 16];
        let mut weight = [0.0f64; 16];
        assert!(dims <= 16, "grids above 16 dimensions are not supported");
        for k in 0..dims {
            let (i, w) = locate(&self.axes[k], point[k]);
            cell[k] = i;
            weight[k] = w;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dims) {
            let mut w = 1.0;
            let mut flat = 0;
            let mut skip = false;
            for k in 0..dims {
                let n = self.axes[k].len();
                let upper = corner >> k & 1 == 1;
                let (i, wk) = if upper {
                    if n == 1 {
                        skip = true;
                        break;
                    }
                    (cell[k] + 1, weight[k])
                } else {
                    (cell[k], 1.0 - weight[k])
                };
                w *= wk;
                flat = flat * n + i;
            }
            if skip || w == 0.0 {
                continue;
            }
            acc += w * values[flat];
        }
        acc
    }
}

/// Cell index and fractional position of `p` on an increasing axis.
fn locate(axis: &[f64], p: f64) -> (usize, f64) {
    let n = axis.len();
    if n == 1 || p <= axis[0] || p.is_nan() {
        return (0, 0.0);
    }
    if p >= axis[n - 1] {
        return (n - 2, 1.0);
    }
    // partition_point gives the first node strictly greater than p
    let hi = axis.partition_point(|a| *a <= p);
    let i = hi - 1;
    let w = (p - axis[i]) / (axis[i + 1] - axis[i]);
    (i, w)
}
