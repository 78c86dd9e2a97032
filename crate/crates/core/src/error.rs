use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid edge ({u}, {v}) for a graph on {n} vertices")]
    InvalidEdge { u: usize, v: usize, n: usize },

    #[error("invalid resistance value {0}")]
    InvalidResistance(f64),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schedule evaluates to {value} for {which} at n = {n}, outside [0, 1]")]
    ScheduleOutOfRange {
        n: usize,
        which: &'static str,
        value: f64,
    },

    #[error("calibration starved: {found} conditioned pairs after {attempts} attempts (wanted {wanted})")]
    CalibrationStarved {
        found: usize,
        wanted: usize,
        attempts: usize,
    },

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Whether this error stems from user input (bad file, bad config,
    /// bad parameter) rather than an internal failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
