use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] iqi_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: malformed row {row}: {reason}")]
    Malformed { path: PathBuf, row: usize, reason: String },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("missing input: {0}")]
    MissingInput(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    /// Process exit code: 1 for bad input of any kind, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(iqi_core::Error::InvalidParameter { .. }) => 1,
            HarnessError::Core(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}

pub(crate) fn config(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}
