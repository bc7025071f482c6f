use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A file could not be read or decoded as a supported raster.
    #[error("{path}: {reason}")]
    Input { path: PathBuf, reason: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(PathBuf),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Broken internal contract (shape mismatch, non-PD covariance, ...).
    #[error("internal error: {0}")]
    Internal(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("integrity check failed: {0}")]
    Integrity(String),

    #[error("pixel ({x}, {y}) is outside the {width}x{height} image")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },

    #[error("unknown superpixel id {0}")]
    UnknownSuperpixel(usize),

    #[error("nothing to undo")]
    NothingToUndo,

    #[error("{path}:{line}: {message}")]
    Manifest {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("duplicate timestamp {timestamp} for subject {subject}")]
    DuplicateTimestamp { subject: String, timestamp: String },

    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Error::Input {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}
