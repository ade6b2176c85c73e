use thiserror::Error;

/// Errors reported by the simulation and optimization routines.
///
/// Numeric kernels that cannot fail by construction (for example the phase
/// objective and its gradient) panic on dimension misuse instead of returning
/// one of these; the `Result`-returning entry points validate their inputs up
/// front so a caller sees the problem at the boundary, not deep in a loop.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: expected dimension {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("coefficient vector must have at least one nonzero entry")]
    ZeroCoefficients,

    #[error("{what} must be finite and positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("{what} must be at least {min}, got {actual}")]
    CountTooSmall {
        what: &'static str,
        min: usize,
        actual: usize,
    },

    #[error("{what} must lie in {range}, got {value}")]
    OutOfRange {
        what: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("log2 argument must be positive, got {0}")]
    LogDomain(f64),

    #[error("channel coefficients must be finite")]
    NonFiniteChannel,

    #[error("exhaustive grid search supports at most {max} reflecting elements, got {actual}")]
    GridTooLarge { max: usize, actual: usize },

    #[error("sweep values must be non-empty and strictly increasing")]
    BadSweepValues,

    #[error(
        "unknown method `{0}` (valid: ao-avg, ao-max, no-irs, rndphz-avg, rndphz-max)"
    )]
    UnknownMethod(String),
}

pub type Result<T> = std::result::Result<T, Error>;
