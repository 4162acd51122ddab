use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violated a domain precondition (negative strength, empty grid, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A limit that diverges was requested as a finite number.
    #[error("divergent quantity: {0}")]
    Divergent(String),

    /// The time grid cannot resolve the requested mode or spectrum (Nyquist/aliasing).
    #[error("grid resolution insufficient: {0}")]
    Resolution(String),

    /// A detection window or integration range exceeds the grid extent.
    #[error("window exceeds grid extent: {0}")]
    Extent(String),

    /// A truncated series or mode sum failed its convergence check.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Hadamard constructions require a power-of-two order.
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),

    /// A likelihood or optimization became degenerate.
    #[error("degenerate problem: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
