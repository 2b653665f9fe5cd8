use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A requested size exceeds a configurable enumeration budget.
    #[error("{what} = {requested} exceeds the budget of {limit} (override with --{flag})")]
    Budget {
        what: &'static str,
        requested: usize,
        limit: usize,
        flag: &'static str,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Two routes that must agree did not.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("evaluation refused: {0}")]
    Convergence(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
