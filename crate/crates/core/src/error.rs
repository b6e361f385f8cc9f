use thiserror::Error;

use crate::report::Witness;

/// Errors raised by constructors and operations.
///
/// Law violations on well-formed input are *not* errors: checkers return a
/// [`crate::report::Verdict`] with a witness instead. `Invalid` is used only
/// when a constructor refuses a value whose laws fail.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("composition typing error: {0}")]
    Typing(String),

    #[error("resource bound exceeded: {what} needs {needed}, bound is {bound}")]
    ResourceBound {
        what: String,
        needed: u128,
        bound: u128,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("{kind} is invalid: {witness}")]
    Invalid {
        kind: &'static str,
        witness: Box<Witness>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(kind: &'static str, witness: Witness) -> Self {
        Error::Invalid {
            kind,
            witness: Box::new(witness),
        }
    }

    pub(crate) fn bound(what: impl Into<String>, needed: u128, bound: u128) -> Self {
        Error::ResourceBound {
            what: what.into(),
            needed,
            bound,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
