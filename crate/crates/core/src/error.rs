use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by map evaluation, matrix assembly, eigen-solving and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum EdmdError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {z} lies within {distance:e} of a pole of the map")]
    Domain { z: Complex64, distance: f64 },

    #[error("inverse branches coincide at w = {w} (critical point on the circle)")]
    DegenerateBranch { w: Complex64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("Gram matrix is numerically singular (largest singular value {largest:e})")]
    SingularGram { largest: f64 },

    #[error("data matrix has numerical rank 0")]
    SingularData,

    #[error("eigenvalue iteration failed to converge (eigenvalue index {index})")]
    ConvergenceFailure { index: usize },

    #[error("no unique interior fixed point: found {found} roots inside the unit disk")]
    NoInteriorFixedPoint { found: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl EdmdError {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        EdmdError::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EdmdError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            EdmdError::Config(_) | EdmdError::InvalidParameter(_) | EdmdError::DimensionMismatch { .. } => 2,
            EdmdError::Io { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, EdmdError>;
