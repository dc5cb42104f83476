//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register mismatch: {0}")]
    RegisterMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    #[error("stationary kernel dimension {found} exceeds cap {cap}")]
    KernelCapExceeded { found: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    #[error("register too large: {0}")]
    RegisterTooLarge(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
