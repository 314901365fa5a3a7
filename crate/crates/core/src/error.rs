use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("rotation axis has zero length")]
    ZeroAxis,

    #[error("shear requires an equatorial mean spin (polar angle off by {offset:.3e} rad)")]
    NotEquatorial { offset: f64 },

    #[error("degenerate state: contrast is zero")]
    ZeroContrast,

    #[error("negative duration {0} s")]
    NegativeDuration(f64),

    #[error("malformed sequence: {0}")]
    MalformedSequence(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("spin {0} exceeds the supported maximum of {max}", max = crate::dicke::MAX_SPIN)]
    SpinTooLarge(f64),

    #[error("spin must be a positive half-integer, got {0}")]
    InvalidSpin(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
