use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the forward model or calibration pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_nm:.3} nm outside valid range [{min_nm:.1}, {max_nm:.1}] nm")]
    Range {
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("need at least {needed} samples, got {got}")]
    Size { needed: usize, got: usize },

    #[error("no coverage: {0}")]
    Coverage(String),

    #[error("fit failed: {reason}")]
    Fit { reason: String, trace: Vec<f64> },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

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

    /// True for failures of the numerical pipeline (as opposed to bad input
    /// files or IO).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Range { .. }
                | Error::Domain(_)
                | Error::NoConvergence { .. }
                | Error::Size { .. }
                | Error::Coverage(_)
                | Error::Fit { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
