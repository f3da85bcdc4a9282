use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("signature mismatch: ({}, {}) vs ({}, {})", left.0, left.1, right.0, right.1)]
    SignatureMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("weight of the zero element is undefined")]
    ZeroWeight,
    #[error("element has mixed parity: {0}")]
    MixedParity(String),
    #[error("element is not homogeneous: {0}")]
    Inhomogeneous(String),
    #[error("invalid family configuration: {0}")]
    InvalidConfig(String),
    #[error("operator {op} is not defined for {context}")]
    Unsupported { op: String, context: String },
    #[error("degree {degree} is below the depth of {family} (minimum {min})")]
    DegreeOutOfRange {
        family: String,
        degree: i64,
        min: i64,
    },
    #[error("closure violation: [{left}, {right}] leaves the span of degree {degree}")]
    ClosureViolation {
        left: String,
        right: String,
        degree: i64,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
