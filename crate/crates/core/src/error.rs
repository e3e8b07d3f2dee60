use thiserror::Error;

/// Errors shared across the workbench.
#[derive(Debug, Error)]
pub enum Error {
    /// Checked 64-bit integer arithmetic overflowed. Identities are verified
    /// in exact mode, so this aborts the computation rather than wrapping.
    #[error("integer overflow in exact arithmetic; reduce the depth or coefficient sizes")]
    Overflow,

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("basis of dimension {dim} exceeds the configured cap {cap}")]
    DimCap { dim: usize, cap: usize },

    #[error("compression margin violated: {0}")]
    MarginViolation(String),

    #[error("identity checks require exact scalar mode")]
    ModeMismatch,

    #[error("{0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;
