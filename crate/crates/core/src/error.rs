use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    /// Subdivision budget exhausted before the tolerance was met.
    #[error("quadrature did not converge: value {value:e}, error estimate {err_est:e}")]
    QuadratureNonConvergence { value: f64, err_est: f64 },

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("design matrix is rank deficient (condition estimate {condition:e})")]
    RankDeficient { condition: f64 },

    /// A linear predictor left the representable range during fitting.
    #[error("fit diverged: {0}")]
    Divergence(String),

    #[error("observed information is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    IndefiniteInformation { min_eigenvalue: f64, eigenvalues: Vec<f64> },

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }
}
