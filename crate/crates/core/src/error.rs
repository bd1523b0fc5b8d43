use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::EventId;

/// A single well-formedness problem found by a validator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    /// Numbered condition of the family definition, when the family numbers them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<u8>,
    pub message: String,
}

impl Violation {
    pub fn new(message: impl Into<String>) -> Self {
        Violation {
            condition: None,
            message: message.into(),
        }
    }

    pub fn condition(condition: u8, message: impl Into<String>) -> Self {
        Violation {
            condition: Some(condition),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.condition {
            Some(c) => write!(f, "Condition {c}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every violation found while validating a candidate structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations(pub Vec<Violation>);

impl Violations {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Violation> {
        self.0.iter()
    }

    pub(crate) fn into_result<T>(mut self, value: T) -> Result<T, Violations> {
        if self.0.is_empty() {
            Ok(value)
        } else {
            self.0.sort();
            self.0.dedup();
            Err(self)
        }
    }
}

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violations {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid event name {0:?}")]
    InvalidEventName(String),
    #[error("event {0} is not part of the structure")]
    OutOfUniverse(EventId),
    #[error("event {0} occurs more than once")]
    DuplicateEvent(EventId),
    #[error("{got} events exceed the limit of {limit}")]
    TooManyEvents { got: usize, limit: usize },
    #[error("not a trace: {0}")]
    NotATrace(String),
    #[error("not a configuration: {0}")]
    NotAConfiguration(String),
    #[error("position {position} is outside a trace of length {len}")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("relation is not a partial order on its carrier")]
    NotAPartialOrder,
    #[error("invalid structure: {0}")]
    Invalid(#[from] Violations),
    #[error("structure has a dependency with both adders and droppers")]
    NotSsdc,
    #[error("structure is not an extended-bundle dynamic causality structure: {0}")]
    NotEbdc(String),
    #[error("transition relation is not strict and dense: {0}")]
    NotStrictDense(String),
    #[error("{semantics} are not defined for {kind} structures")]
    Unsupported {
        semantics: &'static str,
        kind: &'static str,
    },
    #[error("step rejected by condition {0}")]
    StepRejected(u8),
    #[error("unknown check {0:?}")]
    UnknownCheck(String),
    #[error("unknown {what} {name:?}")]
    UnknownName { what: &'static str, name: String },
    #[error("search space of {size} candidates exceeds the bound of {limit}")]
    BoundExceeded { size: u128, limit: u128 },
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: undeclared event {name}")]
    UndeclaredEvent { line: usize, col: usize, name: String },
    #[error("{line}:{col}: {clause} clauses are not allowed in {kind} structures")]
    IllegalClause { line: usize, col: usize, clause: String, kind: &'static str },
}

impl Error {
    /// Line and column of errors raised while reading text.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            Error::Syntax { line, col, .. }
            | Error::UndeclaredEvent { line, col, .. }
            | Error::IllegalClause { line, col, .. } => Some((*line, *col)),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
