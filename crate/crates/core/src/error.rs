use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("grid or parameter mismatch: {0}")]
    Mismatch(String),
    #[error("zero field where a nonzero one is required")]
    ZeroField,
    #[error("inadmissible scale pair (a, b) = ({a}, {b}): {reason}")]
    InvalidScalePair { a: f64, b: f64, reason: String },
    #[error("no convergence after {iterations} iterations (last change {last_change:.3e})")]
    NonConvergence { iterations: usize, last_change: f64 },
    #[error("iteration collapsed to zero at iteration {0}")]
    CollapseToZero(usize),
    #[error("exponent out of window: {0}")]
    OutOfWindow(String),
    #[error("bad field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
