//! Boundary-enforcing kernel corrections for neural operators.
//!
//! A kernel module is any linear map `y = K x` on gridded fields. The
//! [`boundary`] corrections wrap one so that its output satisfies a Dirichlet,
//! Neumann or periodic condition exactly, using only black-box applications
//! of the kernel. The remaining modules build PDE datasets, train a spectral
//! neural operator with corrected layers, and drive the whole thing from a
//! command line.

pub mod boundary;
pub mod fft;
pub mod grid;
pub mod harness;
pub mod kernel;
pub mod operator;
pub mod pde;

pub use grid::{Field, Grid, GridError};
pub use kernel::{DenseKernel, KernelError, KernelModule, SpectralKernel};
