//! Boundary-enforcing corrections of kernel modules.
//!
//! The fast paths in [`correct`] touch the kernel only through `apply`; the
//! dense constructions in [`oracle`] build the corrected matrix explicitly and
//! serve as the reference the fast paths are tested against.

pub mod bounds;
pub mod correct;
pub mod metric;
pub mod oracle;
pub mod plane;
pub mod spec;
pub mod stencil;

use thiserror::Error;

use crate::kernel::KernelError;

pub use bounds::{bound_dirichlet, bound_neumann, bound_periodic};
pub use correct::{correct, correct_dirichlet, correct_neumann, correct_periodic, correct_sides, Rule};
pub use metric::boundary_error;
pub use oracle::{dense_oracle, AffineKernel};
pub use plane::{correct_2d, Face, FaceRule};
pub(crate) use spec::check_weights;
pub use spec::{BcKind, BoundarySpec, Side};
pub use stencil::{fd_coefficients, Edge, FdStencil};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("kernel pivot at index {index} (channel {channel}) is zero; the correction would divide by it")]
    ZeroPivot { index: usize, channel: usize },
    #[error("stencil leading coefficient c0 must be non-zero")]
    ZeroLeadingCoefficient,
    #[error("stencil coefficients must sum to zero, got {0:e}")]
    InconsistentStencil(f64),
    #[error("unsupported stencil order {0} (expected 1 or 2)")]
    UnsupportedOrder(usize),
    #[error("stencil of length {len} does not fit a grid of {n} points")]
    StencilTooLong { len: usize, n: usize },
    #[error("stencil orientation does not match the boundary it is applied to")]
    StencilSide,
    #[error("periodic weights must be positive and sum to one, got alpha={alpha}, beta={beta}")]
    BadWeights { alpha: f64, beta: f64 },
    #[error("boundary values: {0}")]
    BadValues(String),
    #[error("boundary corrections act on 1D fields here; use correct_2d for planes")]
    NotOneDimensional,
    #[error("correct_2d needs a 2D field")]
    NotTwoDimensional,
    #[error("input field has non-finite entries")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty dataset")]
    Empty,
}
