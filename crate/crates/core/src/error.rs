use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameters or inputs (out-of-range ids, probabilities, sizes).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A computation would exceed its memory/size budget.
    #[error("resource budget exceeded: {0}")]
    Budget(String),

    /// An internal invariant failed. Always a bug.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code for the CLI: 2 validation, 3 resource budget, 4 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse { .. } => 2,
            Error::Budget(_) => 3,
            Error::Invariant(_) => 4,
            Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
