use std::io;
use std::path::PathBuf;

use crate::store::StoreError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const IO: i32 = 2;
    pub const PARTIAL_FAILURE: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("ids missing from the paired file: {}", ids.join(", "))]
    MissingPair { ids: Vec<String> },
    #[error("{failed} records failed, above the --max-failures limit of {limit}")]
    PartialFailure { failed: u64, limit: u64 },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingPair { .. } => exit::CONFIG,
            CliError::Io { .. } | CliError::Store(_) => exit::IO,
            CliError::PartialFailure { .. } => exit::PARTIAL_FAILURE,
        }
    }
}
