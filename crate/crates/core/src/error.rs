use thiserror::Error;

#[derive(Debug, Error)]
pub enum QsoError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("negative mass {value} at coordinate {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("coordinates sum to zero")]
    ZeroSum,
    #[error("parameter out of range: {0}")]
    ParamRange(String),
    #[error("invalid heredity tensor: {0}")]
    InvalidTensor(String),
    #[error("point is not a fixed point (residual {0:e})")]
    NotAFixedPoint(f64),
    #[error("Cesaro order {0} exceeds the supported maximum of 5")]
    OrderTooLarge(usize),
    #[error("window of {window} rows exceeds the {available} available")]
    WindowTooLarge { window: usize, available: usize },
    #[error("clustering radius must be positive, got {0}")]
    EpsilonNonpositive(f64),
    #[error("numeric overflow: {0}")]
    NumericOverflow(String),
    #[error("no samples left after burn-in of {burn_in} out of {total} steps")]
    SamplesEmpty { burn_in: usize, total: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl QsoError {
    /// Process exit code for the CLI: 2 for validation problems, 3 for
    /// numeric failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            QsoError::NotAFixedPoint(_) | QsoError::NumericOverflow(_) => 3,
            QsoError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, QsoError>;
