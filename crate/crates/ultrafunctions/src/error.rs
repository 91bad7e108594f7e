use thiserror::Error;

/// Errors produced by space construction, basis selection and the algebra operations.
#[derive(Error, Debug)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("point {point} lies outside the domain [{lo}, {hi}]")]
    Domain { point: f64, lo: f64, hi: f64 },

    #[error("piecewise polynomial is not differentiable: {0}")]
    NotDifferentiable(String),

    #[error(
        "ill-conditioned function space: condition estimate {estimate:.3e} exceeds cap {cap:.3e}; \
         near-dependent generators: {generators:?}"
    )]
    IllConditioned {
        estimate: f64,
        cap: f64,
        generators: Vec<String>,
    },

    #[error("generator {label} is linearly dependent on its predecessors (pivot ratio {ratio:.3e})")]
    DependentGenerator { label: String, ratio: f64 },

    #[error(
        "required point {point} is dependent on the previously selected points \
         (pivot {pivot:.3e} below threshold {threshold:.3e})"
    )]
    DependentPoint {
        point: f64,
        pivot: f64,
        threshold: f64,
    },

    #[error("could not select {needed} independent points ({selected} found among {candidates} candidates)")]
    SelectionFailure {
        needed: usize,
        selected: usize,
        candidates: usize,
    },

    #[error("restricted ultrafunctions belong to different contexts")]
    ContextMismatch,

    #[error("lift failed: function not evaluable at point {0}")]
    Lift(f64),

    #[error("descriptor order {order} exceeds the configured maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("invalid distribution representative: {0}")]
    Representative(String),

    #[error("unknown suite name: {0}")]
    UnknownSuite(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
