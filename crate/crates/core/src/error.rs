use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A register or matrix dimension is outside the supported range.
    #[error("size error: {0}")]
    Size(String),

    /// An argument is inconsistent with the object it is applied to.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An input violates a structural requirement (unitarity, hermiticity, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// An iterative routine did not converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The objective returned NaN or an infinity.
    #[error("objective returned non-finite value {value} at evaluation {eval}")]
    NonFinite { value: f64, eval: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
