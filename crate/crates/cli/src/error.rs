use std::path::Path;

use thiserror::Error;

/// Failure of a CLI command, classified by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, arguments or input data (exit 1).
    #[error("{0}")]
    Validation(String),
    /// A propagation aborted, typically on boundary overflow (exit 2).
    #[error("{0}")]
    Runtime(String),
    /// Reading or writing a file failed (exit 3).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<kickrotor_core::Error> for CliError {
    fn from(err: kickrotor_core::Error) -> Self {
        match err {
            kickrotor_core::Error::BoundaryOverflow { .. } => CliError::Runtime(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
