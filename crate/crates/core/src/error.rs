use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate generator: {0}")]
    DegenerateGenerator(String),

    #[error("inconsistent generator: {0}")]
    InconsistentGenerator(String),

    #[error("singular rate: {0}")]
    SingularRate(String),

    #[error("singular metric: {0}")]
    SingularMetric(String),

    #[error("grid too coarse: estimated relative error {estimate:.3e} exceeds {tol:.3e}, try M = {suggested_m}")]
    Resolution {
        estimate: f64,
        tol: f64,
        suggested_m: usize,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unbounded objective: {0}")]
    Unbounded(String),

    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::Size(_)
            | Error::Parse { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
