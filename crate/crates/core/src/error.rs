use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("non-finite value at sample {sample}, coordinate {coord}")]
    NonFinite { sample: usize, coord: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("integration unstable: {0}")]
    Unstable(String),

    #[error("unknown metric {0:?} (valid: {valid})", valid = crate::metrics::MetricId::valid_ids())]
    UnknownMetric(String),

    #[error("unknown representation {0:?} (valid: ja, lte, dmp)")]
    UnknownRepresentation(String),

    #[error("all representations failed: {0}")]
    AllFailed(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Singular(_) | Error::Unstable(_) | Error::AllFailed(_)
        )
    }
}
