use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("degenerate spectrum: lambda_max - lambda_min = {width}")]
    DegenerateSpectrum { width: f64 },

    #[error("optimizer diverged at epoch {epoch}: non-finite cost")]
    Divergence { epoch: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cell (N={n_qubits}, L={n_layers}, run={run}) failed: {source}")]
    Cell {
        n_qubits: usize,
        n_layers: usize,
        run: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed data in {path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
