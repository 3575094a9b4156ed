//! Crate-wide error type.

use crate::lp::{LpError, LpStatus};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Lp(#[from] LpError),

    /// The requested moment lies outside the reachable mean set of the
    /// discretized measures.
    #[error("closure infeasible for moment {moment}{cell}")]
    ClosureInfeasible { moment: String, cell: String },

    #[error("closure LP ended with status {status:?} for moment {moment}{cell}")]
    ClosureFailed { status: LpStatus, moment: String, cell: String },

    #[error("non-finite value at xi-cell {i}, x-cell {j}")]
    NonFinite { i: usize, j: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    /// Attach the (xi, x) cell coordinates to a closure failure.
    pub(crate) fn at_cell(self, i: usize, j: i64) -> Self {
        let cell = format!(" at xi-cell {i}, x-cell {j}");
        match self {
            Error::ClosureInfeasible { moment, .. } => Error::ClosureInfeasible { moment, cell },
            Error::ClosureFailed { status, moment, .. } => {
                Error::ClosureFailed { status, moment, cell }
            }
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
