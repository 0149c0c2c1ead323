use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time grid is empty")]
    EmptyGrid,

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("integration failed at t = {t} ms: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("invariant violated at t = {t} ms: {what}")]
    InvariantViolation { t: f64, what: String },

    #[error("distribution mass outside the quadrature support is {mass:.3e} (limit 1e-6)")]
    QuadratureSupport { mass: f64 },

    #[error("fit did not converge within {iterations} iterations")]
    FitNoConvergence { iterations: usize, last: Vec<f64> },

    #[error("cannot sample distribution: {0}")]
    Unsampleable(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
