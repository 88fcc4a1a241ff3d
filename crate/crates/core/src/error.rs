//! Error type shared by every module of the crate.
//!
//! Errors split into two kinds so that callers (in particular the CLI) can
//! distinguish bad inputs from numerical failures:
//!
//! * [`ErrorKind::Domain`]: the request lies outside the mathematical
//!   domain of the operation (e.g. an amplitude at or beyond the
//!   heteroclinic limit).
//! * [`ErrorKind::Convergence`]: the inputs were admissible but an
//!   iteration or integration failed to reach its tolerance.

use alloc::string::String;
use core::fmt;

/// Coarse classification of a [`CoreError`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Convergence,
}

/// Error carrying its classification and a human-readable message.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreError {
    kind: ErrorKind,
    msg: String,
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Domain,
            msg: msg.into(),
        }
    }

    pub fn convergence(msg: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Convergence,
            msg: msg.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        self.kind
    }

    pub fn message(&self) -> &str {
        &self.msg
    }
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ErrorKind::Domain => write!(f, "domain error: {}", self.msg),
            ErrorKind::Convergence => write!(f, "convergence error: {}", self.msg),
        }
    }
}

impl core::error::Error for CoreError {}

pub type Result<T> = core::result::Result<T, CoreError>;
