//! A small Fourier neural operator whose spectral layers are wrapped in the
//! boundary corrections, trained with hand-written reverse mode and Adam.

pub mod adam;
pub mod checkpoint;
pub mod gradcheck;
mod correction;
pub mod layers;
pub mod model;
pub mod params;
pub mod train;

use thiserror::Error;

use crate::boundary::BoundaryError;

pub use adam::{Adam, AdamState};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CheckpointError};
pub use model::{model_forward, relative_l2, relative_l2_loss, Prepared};
pub use params::{Arch, OperatorParams, Wiring};
pub use train::{evaluate, train, EpochMetrics, EvalMetrics, TrainConfig, TrainOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("resolution {n} is below twice the {modes} retained modes")]
    Resolution { n: usize, modes: usize },
    #[error("non-finite values after {0}")]
    NonFinite(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
