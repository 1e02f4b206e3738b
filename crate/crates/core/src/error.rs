use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The drift is not in the range of the covariance, so no numeraire
    /// portfolio exists at this state.
    #[error("no numeraire portfolio{}: residual {residual:.3e} exceeds {bound:.3e}", fmt_step(*.step))]
    NoNumeraire {
        step: Option<usize>,
        residual: f64,
        bound: f64,
    },

    #[error("drawdown constraint violated at index {index}: value {value} < {floor} (alpha floor)")]
    ConstraintViolation { index: usize, value: f64, floor: f64 },

    #[error("simulation error on path {path} at step {step}: {reason}")]
    Simulation { path: usize, step: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),
}

fn fmt_step(step: Option<usize>) -> String {
    match step {
        Some(s) => format!(" at step {s}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
