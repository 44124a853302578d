//! PDE problems, their exact or reference solutions, and datasets built from them.

pub mod burgers;
pub mod cavity;
pub mod dataset;
pub mod exact;
pub mod grf;
pub mod io;
mod problem;

use thiserror::Error;

use crate::grid::GridError;

pub use dataset::{bc_residual_1d, build_dataset, Dataset, DatasetMeta};
pub use io::{read_dataset, write_dataset, FormatError};
pub use problem::{Problem, ProblemSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("time step {dt:e} exceeds the stable limit; use dt <= {max_dt:e}")]
    Cfl { dt: f64, max_dt: f64 },
    #[error("cell Peclet number {peclet:.3} >= 2 for the central scheme; use at least {min_points} points")]
    Peclet { peclet: f64, min_points: usize },
    #[error("pressure solve residual {residual:e} above tolerance (history: {history:?})")]
    Poisson { residual: f64, history: Vec<f64> },
    #[error("solution blew up at t = {0}")]
    Diverged(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}
