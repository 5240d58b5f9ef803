use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is out of range ({allowed})")]
    Range {
        what: &'static str,
        value: String,
        allowed: String,
    },
    #[error("prime table up to {limit} cannot certify {needed}")]
    InsufficientTable { limit: u64, needed: u64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("resource cap exceeded: {what} needs {requested}, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: u64,
        cap: u64,
    },
    #[error("oracle limit: {0}")]
    OracleLimit(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn range(what: &'static str, value: impl ToString, allowed: impl ToString) -> Self {
        Error::Range {
            what,
            value: value.to_string(),
            allowed: allowed.to_string(),
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
