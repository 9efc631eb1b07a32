use thiserror::Error;

/// Errors raised by the lattice engine and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("series did not converge within {max_terms} terms: {what}")]
    NonConvergence { what: String, max_terms: usize },
    #[error("divergent tail: {0}")]
    Divergence(String),
    #[error("q-derivative at 0 has no limit: {0}")]
    NoLimit(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("ill-conditioned system (condition estimate {estimate:.3e})")]
    Conditioning { estimate: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("fixed-point iteration diverged after {sweeps} sweeps (last distance {last:.3e})")]
    IterationDiverged { sweeps: usize, last: f64 },
}

pub type QResult<T> = Result<T, QError>;
