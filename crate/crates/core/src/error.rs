use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("density is not positive at w = {0}")]
    NonPositiveDensity(f64),

    #[error("adaptive quadrature did not reach tolerance (estimated error {estimate:e})")]
    QuadratureNonConvergence { estimate: f64 },

    #[error("variance proxy is unbounded for this law")]
    UnboundedProxy,

    #[error("optimizer restarts disagree by {spread:e}")]
    OptimizerStall { spread: f64 },

    #[error("beta = {0} is below -1; the covariance must be positive semidefinite")]
    InvalidBeta(f64),

    #[error("edge probability {0} exceeds 1")]
    InvalidProbability(f64),

    #[error("the trivial representation cannot be used as a frequency")]
    TrivialRepresentation,

    #[error("search space of {0} candidates exceeds the exhaustive-search limit")]
    SearchSpaceTooLarge(f64),

    #[error("series diverged after {terms} terms")]
    SeriesDivergence { terms: usize },

    #[error("eigen-solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidParameter(_)
                | Error::InvalidBeta(_)
                | Error::InvalidProbability(_)
                | Error::TrivialRepresentation
                | Error::SearchSpaceTooLarge(_)
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
