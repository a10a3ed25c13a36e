use thiserror::Error;

/// Errors produced by the counting pipeline.
///
/// The variants map one-to-one onto the CLI exit codes: input problems (2),
/// exhausted budgets and arithmetic overflow (3), and broken internal
/// invariants (4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("enumeration budget of {budget} steps exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("count overflow: {0}")]
    Overflow(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 2,
            Error::BudgetExceeded { .. } | Error::Overflow(_) => 3,
            Error::Invariant(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
