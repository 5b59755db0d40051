use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("alphabet error: {0}")]
    Alphabet(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { key: String, line: usize },
    #[error("unresolved reference: {0}")]
    Unresolved(String),
    #[error("invalid group table: {0}")]
    InvalidTable(String),
    #[error("element index {index} out of range for group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),
    #[error("invalid transversal: {0}")]
    InvalidTransversal(String),
    #[error("membership oracle failure: {0}")]
    Oracle(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unresolved at radius {radius}: {what}")]
    Inconclusive { what: String, radius: usize },
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("i/o error: {0}")]
    Io(String),
}
