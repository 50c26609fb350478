use thiserror::Error;

/// Errors surfaced by the simulation core.
#[derive(Debug, Error)]
pub enum SmcError {
    #[error("retina position ({x}, {y}) outside retina range")]
    OutOfRange { x: f64, y: f64 },

    #[error("receptor vector length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("calibration failed: {undefined} of {total} trials had no shared domain")]
    CalibrationFailed { undefined: usize, total: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SmcError>;
