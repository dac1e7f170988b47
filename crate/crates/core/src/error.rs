use std::fmt;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("sample step {step} ns is coarser than irf_sigma/4 = {limit} ns")]
    UndersampledKernel { step: f64, limit: f64 },

    #[error("time-tag stream is not sorted at record {index}")]
    UnsortedStream { index: usize },

    #[error("timestamp range overflow: {0}")]
    TimestampOverflow(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit did not converge in stage `{stage}` after {iterations} iterations (chi2/dof = {chi2_per_dof:.4})")]
    NonConvergence {
        stage: String,
        iterations: usize,
        chi2_per_dof: f64,
    },

    #[error("{quantity} = {value} lies outside [0, 1]")]
    ProbabilityOutOfRange { quantity: String, value: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl fmt::Display) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.to_string(),
        }
    }
}

/// Fails with [`Error::InvalidParameter`] unless `cond` holds.
pub(crate) fn ensure(cond: bool, name: &str, reason: impl fmt::Display) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(name, reason))
    }
}

/// Rejects probabilities outside the closed unit interval instead of clamping them.
pub(crate) fn check_probability(quantity: &str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::ProbabilityOutOfRange {
            quantity: quantity.to_string(),
            value,
        })
    }
}
