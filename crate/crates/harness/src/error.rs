use std::path::Path;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error in {field}: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Numerical(#[from] simofdm_core::Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl HarnessError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config { field: field.into(), message: message.into() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }

    /// Process exit status: 1 configuration, 2 numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 1,
            HarnessError::Numerical(_) => 2,
            HarnessError::Io { .. } => 3,
        }
    }
}
