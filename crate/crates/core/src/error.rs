use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates an operation's precondition (for example `n <= r`).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Exhaustive search was asked to run over an instance larger than its budget.
    #[error("instance of size {size} exceeds exhaustive-search budget {budget}")]
    BudgetExceeded { size: usize, budget: usize },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
