use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoughError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("depth error: {0}")]
    Depth(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("arguments out of order: {0}")]
    Order(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("derivative unavailable: {0}")]
    Derivative(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("solution blew up after t = {last_time}: {reason}")]
    BlowUp { last_time: f64, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl RoughError {
    /// True for errors caused by bad input shapes or parameters rather than
    /// by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            RoughError::Dimension(_)
                | RoughError::Depth(_)
                | RoughError::Grid(_)
                | RoughError::Parameter(_)
                | RoughError::Order(_)
                | RoughError::Partition(_)
                | RoughError::Domain(_)
                | RoughError::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, RoughError>;
