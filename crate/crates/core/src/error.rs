use thiserror::Error;

use crate::rshtr::TraceRecord;

/// Errors produced by the solvers, problems and benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("subproblem not converged after {sweeps} sweeps (best residual {best_residual:e})")]
    SubproblemNotConverged { best_residual: f64, sweeps: usize },

    #[error("line search exhausted after {iters} iterations (last step {last_eta:e})")]
    LineSearchExhausted { last_eta: f64, iters: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("run aborted after {} iterations: {cause}", trace.len())]
    RunAborted {
        cause: Box<Error>,
        trace: Vec<TraceRecord>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }
}
