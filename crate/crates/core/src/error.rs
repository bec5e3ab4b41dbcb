use thiserror::Error;

/// Errors raised by cubelab operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("coordinate {coord} out of range 1..={n}")]
    CoordinateOutOfRange { coord: usize, n: usize },

    #[error("n = {n} exceeds the exact-mode cap of {cap}; use the sampling estimators instead")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid coordinate set: {0}")]
    InvalidCoordinateSet(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed function spec `{spec}`: {reason}")]
    MalformedSpec { spec: String, reason: String },

    #[error("malformed DNF `{text}`: {reason}")]
    MalformedDnf { text: String, reason: String },

    #[error("measure {measure} exceeds 1/2; complement the function before compressing")]
    MeasureTooLarge { measure: f64 },

    #[error("oracle limits exceeded: {0}")]
    OracleCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
