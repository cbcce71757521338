use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("non-constant exponent at byte {offset}")]
    NonConstantExponent { offset: usize },

    #[error("domain violation at {point}: {message}")]
    Domain { point: f64, message: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid dimension {0} (supported: 1..=64)")]
    InvalidDimension(usize),

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("order violation: B - A has eigenvalue {min_eigenvalue}")]
    OrderViolation { min_eigenvalue: f64 },

    #[error("function is not increasing on the range: divided difference {value} at ({lambda}, {mu})")]
    NotIncreasing { lambda: f64, mu: f64, value: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed matrix file: {0}")]
    MatrixFormat(String),
}

impl Error {
    pub(crate) fn domain(point: f64, message: impl Into<String>) -> Self {
        Error::Domain {
            point,
            message: message.into(),
        }
    }

    /// True for errors caused by evaluating a function outside its domain.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
