use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Richardson estimate exceeded the requested relative tolerance.
    #[error("tolerance not met: value {value:e}, error estimate {error_estimate:e}, tolerance {tolerance:e}")]
    ToleranceNotMet {
        value: f64,
        error_estimate: f64,
        tolerance: f64,
    },
    #[error("non-finite sample {value} at {at}")]
    NonFiniteSample { at: String, value: f64 },
    #[error("point {point} lies outside the carrier {carrier}")]
    OutOfCarrier { point: String, carrier: String },
    #[error("preimage measure unavailable for custom map family")]
    PreimageUnavailable,
    /// The truncated outer integral kept growing under refinement.
    #[error("mixed norm diverges: partial values {partial_values:?}")]
    Divergent { partial_values: Vec<f64> },
    #[error("operator is not finite discrete: {0}")]
    NotFiniteDiscrete(String),
    #[error("matrix for index {index} is singular")]
    SingularMatrix { index: i64 },
    #[error("hypotheses violated: {0}")]
    HypothesesViolated(String),
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("test family list is empty")]
    EmptyFamily,
    #[error("invalid measure space: {0}")]
    InvalidSpace(String),
    #[error("inadmissible exponents: {0}")]
    InvalidExponents(String),
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unbounded carrier {0} requires a truncation window")]
    TruncationRequired(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
