use std::path::PathBuf;

use heraldsim_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const SCHEMA: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const UNACHIEVABLE: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Malformed or inconsistent input. `location` is a field path and, when
    /// known, a line and column.
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::OTHER,
            CliError::Schema { .. } => exit::SCHEMA,
            CliError::Core(e) => match e {
                CoreError::ResourceLimit { .. } => exit::RESOURCE,
                CoreError::ValidationGate { .. }
                | CoreError::NotUnitary { .. }
                | CoreError::Precondition(..) => exit::VALIDATION,
                CoreError::Unachievable { .. } => exit::UNACHIEVABLE,
                CoreError::Domain { .. }
                | CoreError::ModeMismatch { .. }
                | CoreError::ModeIndex { .. }
                | CoreError::DuplicateMode(_)
                | CoreError::InvalidState(_) => exit::SCHEMA,
                _ => exit::OTHER,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
