use thiserror::Error;

/// Errors raised by tensor, cone and solver operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TcpError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: ({0}, {1}) vs ({2}, {3})")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("fractional power of a negative component ({value} at position {index})")]
    NegativeBase { index: usize, value: f64 },

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("cone is not pointed")]
    NonPointedCone,

    #[error("zero generator at position {0}")]
    ZeroGenerator(usize),

    #[error("dimension {dim} exceeds the limit {limit} for {what}")]
    TooLarge {
        what: &'static str,
        dim: usize,
        limit: usize,
    },

    #[error("point is not in the cone (violation {0:e})")]
    NotInCone(f64),

    #[error("point is not a solution (residual {0:e})")]
    NotASolution(f64),

    #[error("operation requires the nonnegative orthant")]
    NonOrthantCone,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, TcpError>;
