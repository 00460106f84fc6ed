use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input: parameter functions, specs, grids.
    #[error("configuration error: {0}")]
    Config(String),

    /// A well-formed input outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A tail that cannot be truncated because the integrand is not integrable.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// Adaptive quadrature ran out of subdivisions before meeting tolerance.
    #[error(
        "quadrature did not converge: value {value:e}, error estimate {error_estimate:e} after {evaluations} evaluations"
    )]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    /// An experiment or estimator that cannot produce a meaningful answer.
    #[error("experiment error: {0}")]
    Experiment(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Divergent(_) | Error::Json(_) => 2,
            Error::NonConvergence { .. } | Error::Experiment(_) => 3,
        }
    }
}
