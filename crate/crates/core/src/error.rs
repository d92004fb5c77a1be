use thiserror::Error;

use crate::polyapprox::PolyApprox;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("support size mismatch: {left} vs {right}")]
    SupportMismatch { left: usize, right: usize },

    #[error("relaxed distribution passed where a probability distribution is required")]
    RelaxedDistribution,

    #[error("degenerate sample: all counts are zero")]
    DegenerateSample,

    #[error("divergence is infinite: p[{index}] > 0 while q[{index}] = 0")]
    InfiniteDivergence { index: usize },

    #[error("non-finite function value at x = {x}")]
    NonFinite { x: f64 },

    #[error("Remez exchange did not converge after {iterations} iterations")]
    RemezNonConvergence {
        iterations: usize,
        best: Box<PolyApprox>,
    },

    #[error("exact evaluation budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("unknown method tag: {0}")]
    UnknownMethod(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
