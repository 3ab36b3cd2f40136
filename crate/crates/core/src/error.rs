use thiserror::Error;

use crate::optimizer::{ControlPath, Diagnostics};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter file schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("calibration failed: {what} (achieved residual {residual:.3e})")]
    Calibration { what: String, residual: f64 },

    #[error("domain error in year {year}: {reason}")]
    Domain { year: usize, reason: String },

    #[error("control `{control}` = {value} outside [{lower}, {upper}] in year {year}")]
    ControlBounds {
        control: &'static str,
        year: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("optimizer did not converge: {}", .0.diagnostics)]
    NonConvergence(Box<NonConverged>),

    #[error("refusing to compute {what}: {reason}")]
    Refused { what: &'static str, reason: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// Best path found before the iteration cap was hit.
#[derive(Debug, Clone)]
pub struct NonConverged {
    pub controls: ControlPath,
    pub diagnostics: Diagnostics,
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
