//! Boundary conditions with their time-indexed data.

use serde::{Deserialize, Serialize};

use super::stencil::{fd_coefficients, Edge, FdStencil};
use super::BoundaryError;

/// Which boundary points of a 1D line a condition constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Both,
}

impl Side {
    pub fn has_left(self) -> bool {
        matches!(self, Side::Left | Side::Both)
    }

    pub fn has_right(self) -> bool {
        matches!(self, Side::Right | Side::Both)
    }

    /// Constrained edges in correction order: left first, then right.
    pub fn edges(self) -> Vec<Edge> {
        let mut e = Vec::with_capacity(2);
        if self.has_left() {
            e.push(Edge::Left);
        }
        if self.has_right() {
            e.push(Edge::Right);
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcKind {
    Dirichlet,
    Neumann,
    Periodic,
}

impl BcKind {
    pub fn name(self) -> &'static str {
        match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Neumann => "neumann",
            BcKind::Periodic => "periodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Some(BcKind::Dirichlet),
            "neumann" => Some(BcKind::Neumann),
            "periodic" => Some(BcKind::Periodic),
            _ => None,
        }
    }
}

/// A boundary condition. Dirichlet and Neumann values are indexed by output
/// time step; a side that is not constrained keeps an empty vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundarySpec {
    Dirichlet { side: Side, left: Vec<f64>, right: Vec<f64> },
    Neumann { side: Side, left: Vec<f64>, right: Vec<f64>, order: usize },
    Periodic { alpha: f64, beta: f64 },
}

impl BoundarySpec {
    pub fn dirichlet(side: Side, left: Vec<f64>, right: Vec<f64>) -> Result<Self, BoundaryError> {
        let s = BoundarySpec::Dirichlet { side, left, right };
        s.validate()?;
        Ok(s)
    }

    pub fn neumann(side: Side, left: Vec<f64>, right: Vec<f64>, order: usize) -> Result<Self, BoundaryError> {
        let s = BoundarySpec::Neumann { side, left, right, order };
        s.validate()?;
        Ok(s)
    }

    pub fn periodic(alpha: f64, beta: f64) -> Result<Self, BoundaryError> {
        let s = BoundarySpec::Periodic { alpha, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn kind(&self) -> BcKind {
        match self {
            BoundarySpec::Dirichlet { .. } => BcKind::Dirichlet,
            BoundarySpec::Neumann { .. } => BcKind::Neumann,
            BoundarySpec::Periodic { .. } => BcKind::Periodic,
        }
    }

    pub fn side(&self) -> Side {
        match self {
            BoundarySpec::Dirichlet { side, .. } | BoundarySpec::Neumann { side, .. } => *side,
            BoundarySpec::Periodic { .. } => Side::Both,
        }
    }

    /// Number of time steps the data covers (`None` for periodic).
    pub fn steps(&self) -> Option<usize> {
        match self {
            BoundarySpec::Dirichlet { side, left, right } | BoundarySpec::Neumann { side, left, right, .. } => {
                Some(if side.has_left() { left.len() } else { right.len() })
            }
            BoundarySpec::Periodic { .. } => None,
        }
    }

    /// Left and right boundary data at time step `t`.
    pub fn values_at(&self, t: usize) -> (Option<f64>, Option<f64>) {
        match self {
            BoundarySpec::Dirichlet { side, left, right } | BoundarySpec::Neumann { side, left, right, .. } => (
                side.has_left().then(|| left[t]),
                side.has_right().then(|| right[t]),
            ),
            BoundarySpec::Periodic { .. } => (None, None),
        }
    }

    /// Neumann stencil for `edge` at spacing `dx`.
    pub fn stencil(&self, dx: f64, edge: Edge) -> Option<Result<FdStencil, BoundaryError>> {
        match self {
            BoundarySpec::Neumann { order, .. } => Some(fd_coefficients(*order, dx, edge)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), BoundaryError> {
        match self {
            BoundarySpec::Periodic { alpha, beta } => check_weights(*alpha, *beta),
            BoundarySpec::Dirichlet { side, left, right } | BoundarySpec::Neumann { side, left, right, .. } => {
                if let BoundarySpec::Neumann { order, .. } = self {
                    if !matches!(order, 1 | 2) {
                        return Err(BoundaryError::UnsupportedOrder(*order));
                    }
                }
                let bad = |m: &str| Err(BoundaryError::BadValues(m.to_string()));
                match side {
                    Side::Left if left.is_empty() || !right.is_empty() => bad("left side needs left data only"),
                    Side::Right if right.is_empty() || !left.is_empty() => bad("right side needs right data only"),
                    Side::Both if left.is_empty() || left.len() != right.len() => {
                        bad("both sides need equally long, non-empty data")
                    }
                    _ if left.iter().chain(right).any(|v| !v.is_finite()) => bad("non-finite boundary value"),
                    _ => Ok(()),
                }
            }
        }
    }
}

pub(crate) fn check_weights(alpha: f64, beta: f64) -> Result<(), BoundaryError> {
    if alpha > 0.0 && beta > 0.0 && ((alpha + beta) - 1.0).abs() <= 1e-12 {
        Ok(())
    } else {
        Err(BoundaryError::BadWeights { alpha, beta })
    }
}
