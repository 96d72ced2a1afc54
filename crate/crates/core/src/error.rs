use thiserror::Error;

#[derive(Debug, Error)]
pub enum CmmError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected}, got {got}")]
    GridMismatch { expected: String, got: String },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("empty history: {0}")]
    EmptyHistory(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("blow-up: max |u| = {max_u:.3e} exceeds {limit:.3e} at t = {t:.6}")]
    BlowUp { max_u: f64, limit: f64, t: f64 },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CmmError>;
