use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("criticality violated: |phi1|_1 + beta |phi2|_1 = {total}, residual {residual:.3e}")]
    Criticality { total: f64, residual: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("resolvent diverges for a_T = {a_t} (needs a_T < 1)")]
    ResolventDiverges { a_t: f64 },

    #[error("tail constant undefined for {0}")]
    TailUndefined(String),

    #[error("expected event count {expected:.3e} exceeds budget {budget} at horizon T = {horizon}")]
    EventBudget { expected: f64, budget: usize, horizon: f64 },

    #[error("overflow: result magnitude about 10^{log10_magnitude:.1}")]
    Overflow { log10_magnitude: f64 },

    #[error("cannot reach requested accuracy: {0}")]
    Accuracy(String),

    #[error("grid is not uniform: {0}")]
    NonUniformGrid(String),

    #[error("Cholesky factorization failed: {0}")]
    Cholesky(String),

    #[error("estimator precondition failed: {0}")]
    Estimator(String),

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
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
