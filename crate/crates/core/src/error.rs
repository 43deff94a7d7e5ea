use thiserror::Error;

use crate::types::CompetitorId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown competitor `{0}`")]
    UnknownCompetitor(CompetitorId),

    /// Bradley-Terry iteration budget exhausted. Carries the best iterate.
    #[error(
        "bradley-terry fit did not converge after {iterations} iterations \
         (last logit change {last_change:.3e}, gradient norm {gradient_norm:.3e})"
    )]
    BtNonConvergence {
        iterations: usize,
        last_change: f64,
        gradient_norm: f64,
        best: Vec<(CompetitorId, f64)>,
    },

    #[error("power iteration did not converge after {iterations} iterations (L1 residual {residual:.3e})")]
    MarkovNonConvergence { iterations: usize, residual: f64 },

    #[error("comparison graph is disconnected ({components} components); enable smoothing to rank anyway")]
    Disconnected { components: usize },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for numerical failures (non-convergence, disconnected chains) as
    /// opposed to bad input.
    pub fn is_computational(&self) -> bool {
        matches!(
            self,
            Error::BtNonConvergence { .. }
                | Error::MarkovNonConvergence { .. }
                | Error::Disconnected { .. }
        )
    }
}
