//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by the attack engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Vector or matrix dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An input carried a NaN or infinity where a finite value is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A configuration violates its own invariants.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A model file failed to parse or validate.
    #[error("model file {path}: {reason}")]
    ModelFormat { path: PathBuf, reason: String },

    /// A dataset file failed to parse or validate.
    #[error("dataset file {path}: {reason}")]
    DatasetFormat { path: PathBuf, reason: String },

    /// Training loss became NaN.
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    /// A statistical fit was asked for on unusable data.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// Filesystem failure, annotated with the path involved.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wraps an I/O failure with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
