use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("evaluator returned non-finite value {value} at (x={x}, p={p})")]
    NonFinite { x: f64, p: f64, value: f64 },

    #[error("phase-space window too small: boundary/peak ratio {ratio:e} exceeds {threshold:e}")]
    WindowTooSmall { ratio: f64, threshold: f64 },

    #[error("conditional moment ill-conditioned at x={x}: |pi_0| = {pi0:e} below floor {floor:e}")]
    IllConditionedConditional { x: f64, pi0: f64, floor: f64 },

    #[error("rotated marginal at theta={theta} has negative mass {negative:e} (total {total:e})")]
    NonpositiveMarginal {
        theta: f64,
        negative: f64,
        total: f64,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for the numerical guards (window size, marginal positivity,
    /// conditional floor) as opposed to bad input or I/O.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::WindowTooSmall { .. }
                | Error::IllConditionedConditional { .. }
                | Error::NonpositiveMarginal { .. }
        )
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}
