//! Crate-wide error type.
//!
//! Errors are grouped by what the caller can do about them: `Structural`
//! bugs (shape mismatches) and `Config` mistakes are caller errors,
//! `Data` wraps ingestion problems with their source row, and `Solver`
//! carries a non-optimal solve status out of training.

use crate::lp::LpStatus;

/// All errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shapes or lengths of inputs do not line up (programming error).
    #[error("structural error: {0}")]
    Structural(String),

    /// An option value is out of its documented domain.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data could not be ingested; `row` is 1-based when known.
    #[error("data error{}: {message}", match .row { Some(r) => format!(" (row {r})"), None => String::new() })]
    Data {
        /// 1-based row in the source file, when attributable.
        row: Option<usize>,
        /// What went wrong.
        message: String,
    },

    /// The LP solver finished without an optimal solution while training.
    #[error("solver failed ({status:?}): {context}")]
    Solver {
        /// Terminal solver status.
        status: LpStatus,
        /// What was being solved.
        context: String,
    },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A persisted artifact could not be parsed or has the wrong version.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Shorthand for a [`Error::Structural`] with a formatted message.
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    /// Shorthand for a [`Error::Config`] with a formatted message.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Shorthand for a [`Error::Data`] without a row number.
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data {
            row: None,
            message: msg.into(),
        }
    }

    /// Shorthand for a [`Error::Data`] attached to a 1-based row.
    pub fn data_row(row: usize, msg: impl Into<String>) -> Self {
        Error::Data {
            row: Some(row),
            message: msg.into(),
        }
    }
}
