//! One-sided finite-difference stencils for boundary derivatives.

use serde::{Deserialize, Serialize};

use super::BoundaryError;

/// Which end of a 1D line a stencil or pivot belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    Left,
    Right,
}

impl Edge {
    /// Grid index of the boundary point on a line of `n` points.
    pub fn pivot(self, n: usize) -> usize {
        match self {
            Edge::Left => 0,
            Edge::Right => n - 1,
        }
    }

    /// Index of the `k`-th point counted inward from the boundary.
    pub fn inward(self, n: usize, k: usize) -> usize {
        match self {
            Edge::Left => k,
            Edge::Right => n - 1 - k,
        }
    }
}

/// Derivative approximation `u'(boundary) ~ sum_k c_k u[inward(k)]`.
///
/// Coefficients already carry the `1/dx` factor. For the right edge `c_k`
/// multiplies `u[N-1-k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdStencil {
    coeffs: Vec<f64>,
    order: usize,
    edge: Edge,
}

impl FdStencil {
    /// Arbitrary stencil; `c0 != 0` and the coefficients must sum to zero.
    pub fn new(coeffs: Vec<f64>, order: usize, edge: Edge) -> Result<Self, BoundaryError> {
        if coeffs.is_empty() || coeffs[0] == 0.0 || !coeffs[0].is_finite() {
            return Err(BoundaryError::ZeroLeadingCoefficient);
        }
        let sum: f64 = coeffs.iter().sum();
        let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
        if sum.abs() > 1e-12 * scale {
            return Err(BoundaryError::InconsistentStencil(sum));
        }
        Ok(Self { coeffs, order, edge })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn c0(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn edge(&self) -> Edge {
        self.edge
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Stencil derivative of the samples `u` (one line of `n` points).
    pub fn apply(&self, u: &[f64]) -> f64 {
        let n = u.len();
        self.coeffs.iter().enumerate().map(|(k, c)| c * u[self.edge.inward(n, k)]).sum()
    }

    /// Value `u[pivot]` must take for the stencil derivative to equal `target`,
    /// given the other samples.
    pub fn solve_pivot(&self, u: &[f64], target: f64) -> f64 {
        let n = u.len();
        let rest: f64 = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| c * u[self.edge.inward(n, k + 1)])
            .sum();
        (target - rest) / self.coeffs[0]
    }
}

/// Standard one-sided stencils: order 1 `(-1, 1)/dx`, order 2
/// `(-3, 4, -1)/(2 dx)`, mirrored with a sign flip for the right edge.
pub fn fd_coefficients(order: usize, dx: f64, edge: Edge) -> Result<FdStencil, BoundaryError> {
    let base: Vec<f64> = match order {
        1 => vec![-1.0 / dx, 1.0 / dx],
        2 => vec![-3.0 / (2.0 * dx), 4.0 / (2.0 * dx), -1.0 / (2.0 * dx)],
        o => return Err(BoundaryError::UnsupportedOrder(o)),
    };
    let coeffs = match edge {
        Edge::Left => base,
        Edge::Right => base.into_iter().map(|c| -c).collect(),
    };
    FdStencil::new(coeffs, order, edge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_is_exact_for_linears() {
        let s = fd_coefficients(1, 0.25, Edge::Left).unwrap();
        let u: Vec<f64> = (0..5).map(|i| 0.25 * i as f64).collect();
        assert_eq!(s.apply(&u), 1.0);
    }

    #[test]
    fn order_two_is_exact_for_quadratics() {
        let dx = 0.1;
        let u: Vec<f64> = (0..6).map(|i| (dx * i as f64).powi(2)).collect();
        let s = fd_coefficients(2, dx, Edge::Left).unwrap();
        assert!(s.apply(&u).abs() < 1e-12);
        // Right end at x = 0.5: derivative 2x = 1.
        let r = fd_coefficients(2, dx, Edge::Right).unwrap();
        assert!((r.apply(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coefficients_sum_to_zero() {
        for order in [1, 2] {
            for edge in [Edge::Left, Edge::Right] {
                let s = fd_coefficients(order, 0.01, edge).unwrap();
                assert!(s.coeffs().iter().sum::<f64>().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_stencils() {
        assert_eq!(fd_coefficients(3, 0.1, Edge::Left), Err(BoundaryError::UnsupportedOrder(3)));
        assert_eq!(FdStencil::new(vec![0.0, 1.0, -1.0], 1, Edge::Left), Err(BoundaryError::ZeroLeadingCoefficient));
        assert!(matches!(FdStencil::new(vec![1.0, 1.0], 1, Edge::Left), Err(BoundaryError::InconsistentStencil(_))));
    }

    #[test]
    fn solve_pivot_inverts_apply() {
        let s = fd_coefficients(2, 0.2, Edge::Right).unwrap();
        let mut u = vec![0.3, -1.0, 2.0, 0.7, 1.1];
        u[4] = s.solve_pivot(&u, 2.5);
        assert!((s.apply(&u) - 2.5).abs() < 1e-12);
    }
}
