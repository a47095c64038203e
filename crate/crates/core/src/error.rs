use thiserror::Error;

/// Errors produced by the kernels, estimators, samplers and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radius {radius} too small: sampled distances would fall below coordinate resolution near the center")]
    RadiusTooSmall { radius: f64 },

    #[error("t = {t} lies outside the profile domain [{lower}, {upper}]")]
    OutsideDomain { t: f64, lower: f64, upper: f64 },

    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    #[error("epsilon {epsilon} must be below 2 * alpha_tilde = {bound}")]
    InvalidEpsilon { epsilon: f64, bound: f64 },

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("covariance of kernel `{kernel}` is not positive semidefinite after jitter escalation")]
    NotPsd { kernel: String },

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("ball does not intersect the sampling grid")]
    EmptyIntersection,

    #[error("no valid scale window: {0}")]
    NoValidWindow(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status for the command line: 2 for configuration and
    /// parameter problems, 3 for budget, numerical-capacity and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget(_) | Error::NotPsd { .. } | Error::Io(_) => 3,
            _ => 2,
        }
    }
}
