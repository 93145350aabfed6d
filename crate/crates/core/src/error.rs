use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("height y must be positive, got {0}")]
    NonPositiveHeight(f64),

    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: String, hi: String },

    #[error("quadrature did not reach tolerance {tol:e} within {budget} panels (last change {last_change:e})")]
    QuadratureBudget { tol: f64, budget: usize, last_change: f64 },

    #[error("stage {0} of the test family is empty")]
    EmptyStage(usize),

    #[error("test family has {available} stages, construction needs {needed}")]
    StageShortfall { available: usize, needed: usize },

    #[error("test family is not nested at stage {0}")]
    NotNested(usize),

    #[error("bisection failed to bracket the level crossing near x = {0}")]
    Bisection(f64),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
