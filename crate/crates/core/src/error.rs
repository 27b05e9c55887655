use thiserror::Error;

/// Errors surfaced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its mathematical domain (e.g. order ≤ −1,
    /// nonpositive coordinate, p < 1).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function/grid pairing does not match (wrong node count or axes).
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A quadrature or limit process failed to converge; the message carries
    /// the diagnostic (last residual, truncation bound, ...).
    #[error("numerical non-convergence: {0}")]
    NonConvergent(String),

    /// Evaluation requested exactly on a kernel singularity.
    #[error("singular evaluation point: {0}")]
    Singular(String),

    /// Malformed external input (CSV, config values).
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
