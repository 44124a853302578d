//! Configuration, the `boonkit` subcommands, and the verification suite.

pub mod checks;
pub mod commands;
pub mod config;
pub mod verify;

use thiserror::Error;

pub use commands::{cmd_bounds, cmd_datagen, cmd_eval, cmd_train, cmd_verify, paired, problem_spec};
pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("failed: {0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl HarnessError {
    /// 2 for usage and configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Failed(_) | HarnessError::Io(_) => 1,
        }
    }
}
