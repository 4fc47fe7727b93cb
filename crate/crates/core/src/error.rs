use thiserror::Error;

/// Errors raised by the simulation library.
///
/// Values that the model treats as outcomes (an infinite divergence, a
/// decoder refusing to decide, an infeasible rate window) are never errors;
/// they are returned as ordinary values.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {index} failed)")]
    NotPositiveDefinite { index: usize },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("conditional density is positive where the marginal density vanishes")]
    NonAbsolutelyContinuous,

    #[error("integration box truncates {mass:e} of probability mass (limit 1e-8)")]
    DomainTooLarge { mass: f64 },

    #[error("symbol {index} outside alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("unsupported channel/input combination: {0}")]
    UnsupportedCombination(String),

    #[error("parameter grid is empty")]
    GridEmpty,

    #[error("size cap exceeded: {0}")]
    SizeOverflow(String),

    #[error("cost constraint has no feasible replacement word")]
    NoFeasibleWord,

    #[error("rate {rate} nats is not below the infimum mutual information {inf_mi} nats")]
    RateTooHigh { rate: f64, inf_mi: f64 },

    #[error("best exponent {gamma} is not positive")]
    NonpositiveExponent { gamma: f64 },

    #[error("decoder slack {epsilon} must exceed 3 x mutual-information stderr ({floor})")]
    EpsilonBelowNoise { epsilon: f64, floor: f64 },

    #[error("loss value {value} outside [0, {max}]")]
    InvalidLoss { value: f64, max: f64 },

    #[error("parameter point {0:?} lies outside the compound set")]
    OutsideParameterSet(Vec<f64>),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
