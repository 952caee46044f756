use thiserror::Error;

/// Failure modes of the solvers and analysis routines.
#[derive(Debug, Error)]
pub enum ScatterError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    Divergence {
        what: String,
        iterations: usize,
        residual: f64,
    },
    #[error("singular evaluation: {0}")]
    Singularity(String),
    #[error("near-singular Wronskian at lambda = {lambda}: |W| = {modulus:.3e}")]
    NearSingular { lambda: f64, modulus: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("truncation bound {bound:.3e} exceeds tolerance {tol:.3e}; try {suggested}")]
    Truncation {
        bound: f64,
        tol: f64,
        suggested: usize,
    },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("time step rejected: {0}")]
    Step(String),
    #[error("spectral condition violated: {0}")]
    Spectral(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ScatterError>;

impl ScatterError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Self::Precondition(msg.into())
    }

    /// True for errors caused by malformed user input rather than solver failure.
    pub fn is_input(&self) -> bool {
        matches!(self, Self::Input(_) | Self::Csv(_) | Self::Range(_))
    }
}
