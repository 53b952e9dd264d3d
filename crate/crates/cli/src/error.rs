use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] llf_core::Error),
}

impl CliError {
    pub fn io(path: &Path, message: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }

    /// Process exit code: 1 for I/O, 2 for validation, 3 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Validation(_) => 2,
            CliError::Core(e) if e.is_internal() => 3,
            CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
