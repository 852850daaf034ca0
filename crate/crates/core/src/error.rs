use thiserror::Error;

/// Errors raised by network construction, operators, sampling and losses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),

    #[error("selection bounds must satisfy upper > 1 > lower >= 0, got lower={lower}, upper={upper}")]
    InvalidBounds { lower: f64, upper: f64 },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("series truncation must be odd, got {0}")]
    EvenTruncation(usize),

    #[error("point {index} lies outside the problem domain")]
    OutsideDomain { index: usize },

    #[error("boundary operator {op} is not valid for {context}")]
    WrongBoundaryComponent { op: &'static str, context: String },

    #[error("iteration {k} outside schedule range 1..={n}")]
    ScheduleOutOfRange { k: usize, n: usize },

    #[error("parameter shapes do not match the target network")]
    ShapeMismatch,

    #[error("relative error undefined: exact solution vanishes on the test set")]
    ZeroReference,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
