use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{linspace, Grid};
use crate::math::clamp_to_simplex;

/// Largest strategy count for which value tables are built.
pub const MAX_STRATEGIES: usize = 4;

/// Full simplex point `(y, 1 - sum y)` for free coordinates `y`; points
/// off the simplex are retracted onto it.
fn simplex_point(free: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(free.len() + 1);
    x.extend_from_slice(free);
    x.push(1.0 - free.iter().sum::<f64>());
    clamp_to_simplex(&mut x);
    x
}

/// Values on a tensor grid whose first `d - 1` axes are the free simplex
/// coordinates `x_1 .. x_{d-1}` and whose remaining axes (if any) are
/// control coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValueTable {
    grid: Grid,
    strategies: usize,
    values: Vec<f64>,
}

impl ValueTable {
    /// `m` evenly spaced points on `[0, 1]` for each free coordinate.
    pub fn simplex_axes(strategies: usize, m: usize) -> Result<Vec<Vec<f64>>> {
        if strategies == 0 {
            return Err(Error::config("value tables need at least one strategy"));
        }
        if strategies > MAX_STRATEGIES {
            return Err(Error::Unsupported(alloc::format!(
                "value tables support at most {MAX_STRATEGIES} strategies, got {strategies}"
            )));
        }
        if m < 2 {
            return Err(Error::config("value grids need at least 2 points per axis"));
        }
        Ok((1..strategies).map(|_| linspace(0.0, 1.0, m)).collect())
    }

    pub fn new(grid: Grid, strategies: usize, values: Vec<f64>) -> Result<Self> {
        if strategies == 0 || grid.dims() + 1 < strategies {
            return Err(Error::config("grid has fewer axes than free simplex coordinates"));
        }
        if values.len() != grid.len() {
            return Err(Error::input(alloc::format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(alloc::format!("value at node {i} is not finite")));
        }
        Ok(ValueTable {
            grid,
            strategies,
            values,
        })
    }

    /// Table over the simplex alone, filled from `f(x)`.
    pub fn on_simplex(strategies: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let grid = Grid::new(Self::simplex_axes(strategies, m)?)?;
        Self::from_nodes(grid, strategies, |x, _| f(x))
    }

    /// Table over `(x, b)`, filled from `f(x, b)`.
    pub fn on_simplex_and_controls(
        strategies: usize,
        m: usize,
        control_axes: Vec<Vec<f64>>,
        f: impl Fn(&[f64], &[f64]) -> f64,
    ) -> Result<Self> {
        let mut axes = Self::simplex_axes(strategies, m)?;
        axes.extend(control_axes);
        Self::from_nodes(Grid::new(axes)?, strategies, f)
    }

    pub fn from_nodes(grid: Grid, strategies: usize, f: impl Fn(&[f64], &[f64]) -> f64) -> Result<Self> {
        let free = strategies.saturating_sub(1);
        let values = (0..grid.len())
            .map(|i| {
                let node = grid.node(i);
                f(&simplex_point(&node[..free]), &node[free..])
            })
            .collect();
        Self::new(grid, strategies, values)
    }

    /// Same grid, values replaced.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), self.strategies, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn strategies(&self) -> usize {
        self.strategies
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of non-simplex axes.
    pub fn extra_dims(&self) -> usize {
        self.grid.dims() + 1 - self.strategies
    }

    /// Simplex point and extra coordinates of node `i`. Nodes of the free
    /// coordinate cube lying off the simplex map to their retraction.
    pub fn node_state(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let node = self.grid.node(i);
        let free = self.strategies - 1;
        (simplex_point(&node[..free]), node[free..].to_vec())
    }

    /// Interpolated value at simplex point `x` and extra coordinates `extra`.
    pub fn value(&self, x: &[f64], extra: &[f64]) -> f64 {
        let mut xs = x.to_vec();
        clamp_to_simplex(&mut xs);
        let mut point = Vec::with_capacity(self.grid.dims());
        point.extend_from_slice(&xs[..self.strategies - 1]);
        point.extend_from_slice(extra);
        self.grid.interpolate(&self.values, &point)
    }

    pub fn sup_distance(&self, other: &ValueTable) -> f64 {
        crate::math::sup_distance(&self.values, &other.values)
    }
}

/// An action stored at every node of a value grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolicyTable {
    grid: Grid,
    strategies: usize,
    actions: Vec<Vec<f64>>,
}

impl PolicyTable {
    pub fn new(grid: Grid, strategies: usize, actions: Vec<Vec<f64>>) -> Result<Self> {
        if actions.len() != grid.len() {
            return Err(Error::input(alloc::format!(
                "{} actions for a grid of {} nodes",
                actions.len(),
                grid.len()
            )));
        }
        Ok(PolicyTable {
            grid,
            strategies,
            actions,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    /// Action of the node nearest to `(x, extra)`; ties go to the lower node.
    pub fn action_at_point(&self, x: &[f64], extra: &[f64]) -> Vec<f64> {
        let mut xs = x.to_vec();
        clamp_to_simplex(&mut xs);
        let mut coords: Vec<f64> = xs[..self.strategies - 1].to_vec();
        coords.extend_from_slice(extra);
        let idx: Vec<usize> = self
            .grid
            .axes()
            .iter()
            .zip(&coords)
            .map(|(axis, p)| nearest(axis, *p))
            .collect();
        self.actions[self.grid.flat_index(&idx)].clone()
    }

    /// Action at a simplex point, for tables over the simplex alone.
    pub fn action_at(&self, x: &[f64]) -> Vec<f64> {
        self.action_at_point(x, &[])
    }

    /// Largest difference quotient of the actions between neighboring nodes
    /// (sup norm over action coordinates).
    pub fn grid_modulus(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.grid.len() {
            let idx = self.grid.multi_index(i);
            for (k, axis) in self.grid.axes().iter().enumerate() {
                if idx[k] + 1 >= axis.len() {
                    continue;
                }
                let mut next = idx.clone();
                next[k] += 1;
                let j = self.grid.flat_index(&next);
                let gap = axis[idx[k] + 1] - axis[idx[k]];
                let diff = crate::math::sup_distance(&self.actions[i], &self.actions[j]);
                m = m.max(diff / gap);
            }
        }
        m
    }
}

fn nearest(axis: &[f64], p: f64) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, a) in axis.iter().enumerate() {
        let d = (a - p).abs();
        if d < dist {
            best = i;
            dist = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_reproduced() {
        let t = ValueTable::on_simplex(3, 5, |x| x[0] * x[0] + 3.0 * x[1]).unwrap();
        for i in 0..t.len() {
            let (x, extra) = t.node_state(i);
            let on_simplex = t.grid().node(i).iter().sum::<f64>() <= 1.0 + 1e-15;
            if on_simplex {
                assert_eq!(t.value(&x, &extra), t.values()[i]);
            }
        }
    }

    #[test]
    fn refuses_large_simplices() {
        assert!(matches!(ValueTable::simplex_axes(5, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn policy_lookup_uses_nearest_node() {
        let grid = Grid::new(alloc::vec![linspace(0.0, 1.0, 3)]).unwrap();
        let p = PolicyTable::new(grid, 2, alloc::vec![alloc::vec![0.0], alloc::vec![1.0], alloc::vec![2.0]]).unwrap();
        assert_eq!(p.action_at(&[0.2, 0.8]), alloc::vec![0.0]);
        assert_eq!(p.action_at(&[0.55, 0.45]), alloc::vec![1.0]);
        assert_eq!(p.action_at(&[0.25, 0.75]), alloc::vec![0.0]);
        assert!((p.grid_modulus() - 2.0).abs() < 1e-15);
    }
}
