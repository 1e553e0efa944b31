use thiserror::Error;

/// Errors produced anywhere in the simulator and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("{0} diverges at this parameter")]
    Divergent(&'static str),

    #[error("size mismatch: expected {expected}, got {got}")]
    Size { expected: usize, got: usize },

    #[error("degenerate phase spread: dispersion has zero range but phi0 = {0}")]
    DegenerateSpread(f64),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("step size {dt:e} s violates stability guard (scale {scale:e} rad/s); use dt <= {suggested:e} s")]
    StepSize { dt: f64, scale: f64, suggested: f64 },

    #[error("no minimum of |Delta| detected before t_end = {0:e} s")]
    TriggerTimeout(f64),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("singular point: {0}")]
    Singular(String),

    #[error("analysis failed: {0}")]
    Analysis(String),

    #[error("window too short: {got} samples, need at least {need}")]
    WindowTooShort { got: usize, need: usize },

    #[error("rank-deficient regression: {0}")]
    Rank(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
