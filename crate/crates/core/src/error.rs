use thiserror::Error;

/// Errors raised by distance, interval and model computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate in sample")]
    NonFinite,

    #[error("trimming constant must lie in [0, 1/2), got {0}")]
    InvalidTrim(f64),

    #[error("Wasserstein order must be >= 1, got {0}")]
    InvalidOrder(f64),

    #[error("level alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("operation requires the {expected} band family")]
    WrongFamily { expected: &'static str },

    #[error("relative VC band width nu = {nu} >= 1; increase n or alpha")]
    NuTooLarge { nu: f64 },

    #[error(
        "condition A1 fails for delta = {delta} at level {alpha} with n = {n}; \
         increase delta above {min_delta} or increase n"
    )]
    A1Violated {
        delta: f64,
        alpha: f64,
        n: usize,
        min_delta: f64,
    },

    #[error("need at least {required} points, got {found}")]
    TooFewPoints { required: usize, found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no closed-form oracle registered for {0}")]
    NoOracle(String),

    #[error("invalid distribution specification: {0}")]
    InvalidSpec(String),

    #[error("simulator failure: {0}")]
    SimulatorFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
