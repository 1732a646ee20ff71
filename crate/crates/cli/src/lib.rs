//! Command implementations behind the `omm` binary.

pub mod commands;
pub mod config;
pub mod verify;

use thiserror::Error;

/// Errors surfaced by subcommands, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("data infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 2,
            CliError::Verify(_) | CliError::Runtime(_) => 1,
            CliError::Infeasible(_) => 3,
        }
    }
}

impl From<omm_core::data::DataError> for CliError {
    fn from(e: omm_core::data::DataError) -> Self {
        use omm_core::data::DataError;
        match e {
            DataError::Geometry(g @ omm_core::GeometryError::NotSeparable { .. }) => CliError::Infeasible(g.to_string()),
            DataError::InvalidParam(m) => CliError::Usage(m),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<omm_core::harness::EmitError> for CliError {
    fn from(e: omm_core::harness::EmitError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
