use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed an argument outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structurally well-formed data that violates a graph or matrix invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Exhaustive enumeration would visit more subsets than allowed.
    #[error("enumeration of {needed} subsets exceeds the budget of {budget}; use the MIS sampler instead")]
    BudgetExceeded { needed: u128, budget: u64 },

    /// No k-subset carries a perfect matching, so the Hafnian distribution is empty.
    #[error("no {k}-vertex subgraph has a perfect matching")]
    EmptyDistribution { k: usize },

    /// The MIS chain could not find any nonzero-weight starting state.
    #[error("no nonzero-weight {k}-subset found after {attempts} uniform proposals")]
    NoNonzeroState { k: usize, attempts: u64 },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 2,
            Error::Io(_) => 3,
            _ => 1,
        }
    }
}
