use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerance on the sum of simplex weights.
pub const TOL_SUM: f64 = 1e-9;
/// Largest negative excursion tolerated on a coordinate after an ODE step.
pub const TOL_POS: f64 = 1e-12;

/// A point of the probability simplex: strategy frequencies of the crowd.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct SimplexState(Vec<f64>);

impl SimplexState {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::input("simplex state needs at least one coordinate"));
        }
        if let Some((j, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < -TOL_POS)
        {
            return Err(Error::input(alloc::format!(
                "simplex weight {j} is {w}, expected non-negative"
            )));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > TOL_SUM {
            return Err(Error::input(alloc::format!(
                "simplex weights sum to {s}, expected 1"
            )));
        }
        Ok(SimplexState(weights))
    }

    pub fn vertex(d: usize, j: usize) -> Self {
        let mut w = alloc::vec![0.0; d];
        w[j] = 1.0;
        SimplexState(w)
    }

    pub fn uniform(d: usize) -> Self {
        SimplexState(alloc::vec![1.0 / d as f64; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for SimplexState {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Integer occupation numbers plus the scale turning them into densities.
///
/// For fixed populations the scale is `1/N`; for growth and coalition models
/// it is the density unit `h`, and index `k` stands for size `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationState {
    counts: Vec<u64>,
    scale: f64,
}

impl OccupationState {
    /// The number of slots is the truncation bound `J_max`.
    pub fn new(counts: Vec<u64>, scale: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::input("occupation state needs at least one slot"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::input(alloc::format!("scale must be positive, got {scale}")));
        }
        Ok(OccupationState { counts, scale })
    }

    /// Fixed population with scale `1/N`.
    pub fn population(counts: Vec<u64>) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::input("no agents"));
        }
        Self::new(counts, 1.0 / n as f64)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_index(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `Σ (k+1) n_k`, the number of agents when slots index coalition sizes.
    pub fn mass(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, n)| (k as u64 + 1) * n)
            .sum()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.counts.iter().map(|n| *n as f64 * self.scale).collect()
    }

    /// Apply a sparse jump; fails without modifying the state if a count
    /// would go negative or an index is out of range.
    pub fn apply(&mut self, delta: &[(usize, i64)]) -> Result<()> {
        for &(i, dv) in delta {
            let c = *self
                .counts
                .get(i)
                .ok_or_else(|| Error::input(alloc::format!("jump index {i} out of range")))?;
            if (c as i64) + dv < 0 {
                return Err(Error::input(alloc::format!(
                    "jump would make count {i} negative"
                )));
            }
        }
        for &(i, dv) in delta {
            self.counts[i] = (self.counts[i] as i64 + dv) as u64;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_rejects_bad_sum() {
        assert!(SimplexState::new(alloc::vec![0.5, 0.6]).is_err());
        assert!(SimplexState::new(alloc::vec![-0.1, 1.1]).is_err());
        assert!(SimplexState::new(alloc::vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn apply_is_atomic() {
        let mut s = OccupationState::population(alloc::vec![1, 0, 2]).unwrap();
        assert!(s.apply(&[(2, 1), (1, -1)]).is_err());
        assert_eq!(s.counts(), &[1, 0, 2]);
        s.apply(&[(0, -1), (1, 1)]).unwrap();
        assert_eq!(s.counts(), &[0, 1, 2]);
    }

    #[test]
    fn mass_counts_agents_in_coalitions() {
        let s = OccupationState::new(alloc::vec![3, 1, 2], 0.5).unwrap();
        assert_eq!(s.mass(), 3 + 2 + 6);
        assert_eq!(s.densities(), alloc::vec![1.5, 0.5, 1.0]);
    }
}
