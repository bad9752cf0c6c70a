use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exact evaluation is not available for {0}")]
    UnsupportedExact(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The convex projection stopped at its iteration cap; `gap` bounds the
    /// remaining distance error.
    #[error("convex projection did not converge after {iterations} iterations (gap bound {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("ill-conditioned system (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("Richardson extrapolation diverged: {0}")]
    Divergence(String),

    #[error("negative curvature {curvature:e} detected; the boundary is not convex")]
    NonConvex { curvature: f64 },

    #[error("product proportionality inconsistent across bodies (relative spread {spread:.4})")]
    InconsistentProduct { spread: f64 },

    #[error("degenerate body: {0}")]
    Degenerate(String),

    #[error("invalid motion window: {0}")]
    InvalidWindow(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
