use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponent p = {0} is not in [1, ∞]")]
    InvalidExponent(f64),

    #[error("cosine and sine coefficient lists differ in length ({cos} vs {sin})")]
    LengthMismatch { cos: usize, sin: usize },

    #[error(
        "grid of {m} points is too coarse for degree {degree} (need a power of two ≥ {required})"
    )]
    GridTooCoarse {
        m: usize,
        degree: usize,
        required: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("table sequence has {len} entries, index {index} requested")]
    TableOutOfRange { index: usize, len: usize },

    #[error("sequence fits no multiplier-bound branch on [{lo}, {hi}]")]
    NoMultiplierBranch { lo: usize, hi: usize },

    #[error(
        "{method} solver did not converge after {iterations} iterations (last value {last_value})"
    )]
    SolverFailed {
        method: &'static str,
        iterations: usize,
        last_value: f64,
    },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("sequence construction rejected: {0}")]
    SequenceDiagnostic(String),

    #[error("input is not a non-negative lacunary series: {0}")]
    NotLacunary(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}
