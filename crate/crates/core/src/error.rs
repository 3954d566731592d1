use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The recursion produced a non-finite value.
    #[error("simulation exploded at time index {t} (value {value})")]
    Explosion { t: usize, value: f64 },

    #[error("insufficient data: need more than {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid decay profile: {0}")]
    InvalidDecay(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular design matrix (ridge fallback disabled)")]
    SingularDesign,

    #[error("empty dataset")]
    EmptyDataset,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("too many failed replications: {failed} of {total}")]
    ReplicationFailures { failed: usize, total: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than a failure at run time.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InsufficientData { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidDecay(_)
                | Error::InvalidParameter(_)
                | Error::EmptyDataset
                | Error::Parse { .. }
                | Error::Json(_)
        )
    }
}
