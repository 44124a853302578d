//! Uniform endpoint-inclusive grids and the multi-channel fields sampled on them.
//!
//! Both boundary points are gridpoints: along every dimension the boundary
//! indices are `0` and `n - 1`, and the corrections read and write those
//! indices directly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest resolution accepted along any dimension.
pub const MIN_POINTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {MIN_POINTS} points per dimension, got {0}")]
    TooFewPoints(usize),
    #[error("grid must have 1 or 2 dimensions, got {0}")]
    BadDims(usize),
    #[error("extent [{0}, {1}] is empty or not finite")]
    BadExtent(f64, f64),
    #[error("field expects {expected} values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("field needs at least one channel")]
    NoChannels,
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
}

/// Uniform 1D or 2D grid with both endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: Vec<usize>,
    extent: Vec<(f64, f64)>,
}

impl Grid {
    /// 1D grid on `[0, 1]`.
    pub fn unit_1d(n: usize) -> Result<Self, GridError> {
        Self::new(vec![n], vec![(0.0, 1.0)])
    }

    /// 2D grid on `[0, 1]^2` with `n` points per side.
    pub fn unit_2d(n: usize) -> Result<Self, GridError> {
        Self::new(vec![n, n], vec![(0.0, 1.0), (0.0, 1.0)])
    }

    pub fn line(n: usize, lo: f64, hi: f64) -> Result<Self, GridError> {
        Self::new(vec![n], vec![(lo, hi)])
    }

    pub fn new(n: Vec<usize>, extent: Vec<(f64, f64)>) -> Result<Self, GridError> {
        if n.is_empty() || n.len() > 2 || extent.len() != n.len() {
            return Err(GridError::BadDims(n.len()));
        }
        for (&ni, &(lo, hi)) in n.iter().zip(&extent) {
            if ni < MIN_POINTS {
                return Err(GridError::TooFewPoints(ni));
            }
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(GridError::BadExtent(lo, hi));
            }
        }
        Ok(Self { n, extent })
    }

    pub fn dims(&self) -> usize {
        self.n.len()
    }

    /// Points along dimension `d`.
    pub fn n(&self, d: usize) -> usize {
        self.n[d]
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn extent(&self, d: usize) -> (f64, f64) {
        self.extent[d]
    }

    /// Spacing `(x_{N-1} - x_0) / (N - 1)` along dimension `d`.
    pub fn dx(&self, d: usize) -> f64 {
        let (lo, hi) = self.extent[d];
        (hi - lo) / (self.n[d] - 1) as f64
    }

    /// Total number of gridpoints.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of point `i` along dimension `d`. The last point is exactly
    /// the upper extent.
    pub fn coord(&self, d: usize, i: usize) -> f64 {
        let (lo, hi) = self.extent[d];
        let last = self.n[d] - 1;
        if i == last {
            hi
        } else {
            lo + (hi - lo) * (i as f64 / last as f64)
        }
    }

    pub fn coords(&self, d: usize) -> Vec<f64> {
        (0..self.n[d]).map(|i| self.coord(d, i)).collect()
    }

    /// Same extent, different resolution (every dimension gets `n`).
    pub fn with_resolution(&self, n: usize) -> Result<Self, GridError> {
        Self::new(vec![n; self.dims()], self.extent.clone())
    }

    /// Flat index of `(ix, iy)` on a 2D grid; x varies fastest.
    pub fn index_2d(&self, ix: usize, iy: usize) -> usize {
        debug_assert_eq!(self.dims(), 2);
        iy * self.n[0] + ix
    }
}

/// Channel-major float64 samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    channels: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, channels: usize, values: Vec<f64>) -> Result<Self, GridError> {
        if channels == 0 {
            return Err(GridError::NoChannels);
        }
        let expected = channels * grid.len();
        if values.len() != expected {
            return Err(GridError::ValueCount { expected, got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { grid, channels, values })
    }

    pub fn zeros(grid: Grid, channels: usize) -> Self {
        let len = grid.len() * channels.max(1);
        Self { grid, channels: channels.max(1), values: vec![0.0; len] }
    }

    /// Single-channel field from samples.
    pub fn scalar(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        Self::new(grid, 1, values)
    }

    /// Single-channel field evaluated pointwise from a function of the 1D coordinate.
    pub fn from_fn_1d(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        let values = grid.coords(0).into_iter().map(f).collect();
        Self::scalar(grid, values)
    }

    /// Builds a field without the finiteness scan. Callers guarantee the shape.
    pub(crate) fn from_parts(grid: Grid, channels: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), channels * grid.len());
        Self { grid, channels, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Points per channel.
    pub fn points(&self) -> usize {
        self.grid.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.points();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.points();
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `a * self + b * other`, shapes must agree.
    pub fn lin_comb(&self, a: f64, other: &Field, b: f64) -> Field {
        assert_eq!(self.values.len(), other.values.len(), "field shapes differ");
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Field::from_parts(self.grid.clone(), self.channels, values)
    }

    /// Field with `channels` channels and a one at `index` in every channel.
    pub fn impulse(grid: Grid, channels: usize, index: usize) -> Field {
        let mut f = Field::zeros(grid, channels);
        let n = f.points();
        for c in 0..f.channels {
            f.values[c * n + index] = 1.0;
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_gridpoints() {
        let g = Grid::unit_1d(7).unwrap();
        assert_eq!(g.coord(0, 0), 0.0);
        assert_eq!(g.coord(0, 6), 1.0);
        assert!((g.dx(0) - 1.0 / 6.0).abs() < 1e-15);
        let g = Grid::line(500, 0.0, 0.5).unwrap();
        assert_eq!(g.coord(0, 499), 0.5);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert_eq!(Grid::unit_1d(3), Err(GridError::TooFewPoints(3)));
        assert!(matches!(Grid::line(8, 1.0, 1.0), Err(GridError::BadExtent(..))));
        assert!(matches!(Grid::new(vec![4, 4, 4], vec![(0.0, 1.0); 3]), Err(GridError::BadDims(3))));
    }

    #[test]
    fn field_checks_shape_and_finiteness() {
        let g = Grid::unit_1d(4).unwrap();
        assert!(Field::new(g.clone(), 2, vec![0.0; 8]).is_ok());
        assert_eq!(
            Field::new(g.clone(), 2, vec![0.0; 7]),
            Err(GridError::ValueCount { expected: 8, got: 7 })
        );
        assert_eq!(Field::scalar(g, vec![0.0, f64::NAN, 0.0, 0.0]), Err(GridError::NonFinite(1)));
    }

    #[test]
    fn two_d_indexing_is_x_fastest() {
        let g = Grid::unit_2d(5).unwrap();
        assert_eq!(g.index_2d(1, 0), 1);
        assert_eq!(g.index_2d(0, 1), 5);
        assert_eq!(g.len(), 25);
    }
}
