use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    OutcomeRange { index: usize, value: f64 },

    #[error("constraint {constraint} evaluated to {value} for action {action}; expected a value in [-1, 1]")]
    ConstraintRange {
        constraint: usize,
        action: usize,
        value: f64,
    },

    #[error("agent `{agent}` has no feasible action left at round {round}")]
    FeasibilityExhausted { agent: String, round: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("unsupported query: {0}")]
    Unsupported(String),

    #[error("minmax solver stopped after {iterations} iterations with gap {achieved:e} (target {target:e})")]
    Solver {
        target: f64,
        achieved: f64,
        iterations: usize,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by bad user input rather than by a failed run.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Dimension { .. } | Error::OutcomeRange { .. }
        )
    }
}
