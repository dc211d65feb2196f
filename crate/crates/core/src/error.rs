//! Shared error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("hash count mismatch: {0}")]
    HashCountMismatch(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("generator cap exceeded: {0}")]
    CapExceeded(String),
    #[error("unsupported base solver: {0}")]
    UnsupportedBase(String),
    #[error("not a member: {0}")]
    NotAMember(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
