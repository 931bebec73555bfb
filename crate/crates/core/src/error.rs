use thiserror::Error;

/// Errors raised by parameter validation and the analysis entry points.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("transition requested from a state whose ripples are all empty")]
    EmptyRipples,

    #[error("throughput is undefined for m = 0 slots")]
    ZeroSlots,

    #[error("exhaustive enumeration needs n*m <= {max}, got n*m = {nm}")]
    OracleBudget { nm: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
