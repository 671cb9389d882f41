use std::io;

use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum HullError {
    #[error("matrix is singular (pivot {pivot:.3e} below tolerance)")]
    Singular { pivot: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range for {len} points")]
    Index { index: usize, len: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("start point is not strictly inside the half-space representation")]
    InfeasibleStart,

    #[error("polyhedron has empty interior (inscribed radius {radius:.3e})")]
    EmptyInterior { radius: f64 },

    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),

    #[error("timed out after {elapsed:.3} s")]
    Timeout { elapsed: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("parse error: {0}")]
    ParseMessage(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<serde_json::Error> for HullError {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            HullError::Io(err.into())
        } else {
            HullError::Schema(err.to_string())
        }
    }
}

pub type Result<T, E = HullError> = std::result::Result<T, E>;
