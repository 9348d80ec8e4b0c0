use thiserror::Error;

/// Errors raised by the numerical routines and the scenario front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("eigensolver did not converge for eigenvalue index {index} after {iterations} iterations")]
    NonConvergence { index: usize, iterations: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resolution too coarse: {0}")]
    CoarseResolution(String),

    #[error("reference point {gamma} lies numerically on the spectrum (distance {distance:e})")]
    GammaOnSpectrum { gamma: f64, distance: f64 },

    #[error("vector has spectral components outside the window, relative residual {residual:e}")]
    OutsideWindow { residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
