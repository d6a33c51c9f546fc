use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bias {0} V is outside the +/-10 V generator range")]
    BiasOutOfRange(f64),

    #[error("invalid duration {0} s")]
    InvalidDuration(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },

    #[error("S-matrix is not invertible (|det| = {det:e}){}", .index.map(|i| format!(" at frequency index {i}")).unwrap_or_default())]
    SingularConversion { det: f64, index: Option<usize> },

    #[error("empty sweep")]
    EmptySweep,

    #[error("set point {target} not reached after {ticks} ticks (last reading {last})")]
    SetpointUnreachable { target: f64, last: f64, ticks: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("no qualifying neighbour pairs within eps")]
    InsufficientPairs,

    #[error("series is constant")]
    DegenerateSeries,

    #[error("loop {0} is incomplete")]
    PartialLoop(usize),

    #[error("expected {expected} features, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("training diverged at epoch {0}")]
    DivergedTraining(usize),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("service failed to start: {0}")]
    ServiceStartError(String),

    #[error("{0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid_param(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name: name.to_string(),
        reason: reason.into(),
    }
}
