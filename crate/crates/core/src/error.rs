use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singularity: {0}")]
    Singular(String),
    #[error("accuracy target {target:e} not met in {context}: best estimate {value} with error {error:e}")]
    Accuracy {
        value: Complex64,
        error: f64,
        target: f64,
        context: String,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("iteration series diverged after {terms} terms (last norms {last_norms:?})")]
    Divergence { terms: usize, last_norms: Vec<f64> },
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
