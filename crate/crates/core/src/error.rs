use thiserror::Error;

use crate::xstate::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid X state: {0}")]
    InvalidState(ValidationReport),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("negative probability {value} exceeds tolerance")]
    NegativeProbability { value: f64 },

    #[error("Fock truncation n_max = {n_max} leaves tail mass {tail:e}; need n_max >= {required}")]
    Truncation { n_max: usize, tail: f64, required: usize },

    #[error("step size dt = {dt} exceeds stability bound {bound}")]
    StepSize { dt: f64, bound: f64 },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidState(_) | Error::NegativeProbability { .. } => 2,
            Error::InvalidParams(_)
            | Error::InvalidGrid(_)
            | Error::Truncation { .. }
            | Error::StepSize { .. }
            | Error::UnknownStrategy { .. }
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => 3,
        }
    }
}
