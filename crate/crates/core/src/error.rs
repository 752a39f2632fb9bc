use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid energy interval [{a}, {b})")]
    InvalidInterval { a: f64, b: f64 },

    #[error("eigenvectors are required but the spectrum holds eigenvalues only")]
    MissingEigenvectors,

    #[error("eigensolver did not converge for matrix `{tag}` (eigenvalue {index}, {iterations} sweeps)")]
    NoConvergence {
        tag: String,
        index: usize,
        iterations: usize,
    },

    #[error("quadrature did not reach tolerance {tol:e} within {nodes} nodes (last change {last_change:e})")]
    QuadratureBudget { tol: f64, nodes: usize, last_change: f64 },

    #[error("realization {index} (seed {seed:#018x}) failed: {source}")]
    Realization {
        index: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("corrupt cache file {path}: {reason}")]
    CorruptCache { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
