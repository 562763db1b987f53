use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the graduation library.
#[derive(Debug, Error)]
pub enum GradError {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data failed validation.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A quantity required by the requested operation is not available.
    #[error("{0}")]
    Missing(String),

    /// The cross-validation objective could not be evaluated.
    #[error("cross-validation statistic is not finite at h = {h}, s = {s}")]
    NonFiniteObjective { h: f64, s: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed CSV content, located by data row (1-based, header excluded) and column.
    #[error("{path}: row {row}, column `{column}`: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, GradError>;
