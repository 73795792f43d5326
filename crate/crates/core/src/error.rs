use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bisection could not bracket a root: {0}")]
    NoBracket(String),

    #[error("bisection did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("convolution padding factor {pad_factor} is below the wraparound-free minimum of 2")]
    InsufficientPadding { pad_factor: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("momentum box clips the phase-space support: needs half-width {needed}, has {available}")]
    MomentumBoxTooSmall { needed: f64, available: f64 },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("value outside the exact integer range: {0}")]
    Overflow(String),

    #[error("state is not orthonormal: max Gram deviation {deviation:e}")]
    NotOrthonormal { deviation: f64 },

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("eigen-solver failure: {0}")]
    Eigen(String),
}
