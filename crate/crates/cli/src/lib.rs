//! Library side of the `tomo` command: run configuration, subcommands and exit codes.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
//! 3 non-simple field, 4 solver failure.

pub mod commands;
pub mod config;

use thiserror::Error;
use tomo_core::TomoError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("non-simple field: {0}")]
    NonSimple(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NonSimple(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<TomoError> for CliError {
    fn from(e: TomoError) -> Self {
        let msg = e.to_string();
        match e {
            TomoError::Config(_) | TomoError::PriorTruncationInfeasible { .. } => CliError::Config(msg),
            TomoError::NonSimpleSuspected(_) => CliError::NonSimple(msg),
            TomoError::Solver { .. } | TomoError::Domain(_) | TomoError::Validation(_) => CliError::Solver(msg),
            TomoError::Io(_) | TomoError::Json(_) | TomoError::Csv(_) => CliError::Other(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

