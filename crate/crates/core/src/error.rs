use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the geometry, solver and evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("singular metric: {0}")]
    SingularMetric(String),

    #[error("degenerate segment between points {index} and {} (chord length {length:e})", index + 1)]
    DegenerateSegment { index: usize, length: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("unreachable endpoint: {0}")]
    UnreachableEndpoint(String),
}

/// Errors raised while loading or validating a weight file.
#[derive(Debug, Error)]
pub enum WeightFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },
}

impl WeightFileError {
    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        WeightFileError::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = GeodesicError> = std::result::Result<T, E>;
