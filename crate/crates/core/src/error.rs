//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by waveform generation, scene synthesis, processing
/// operations, configuration handling, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented constraint.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Inputs that must share a sample rate, length, or layout do not.
    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    /// An operation was handed nothing to work on (empty set, missing role).
    #[error("empty input: {0}")]
    Empty(String),

    /// A requested index, delay, or bin lies outside its valid domain.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A scenario configuration failed schema validation. `key` names the
    /// offending configuration key.
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file does not match the expected binary or CSV layout.
    #[error("bad file format: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// Reject non-finite and non-positive parameter values (NaN included).
pub(crate) fn ensure_positive(value: f64, name: &'static str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be positive and finite"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
