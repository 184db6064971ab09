use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is infinite; it has no shadow")]
    InfiniteElement,
    #[error("denominator vanishes at the evaluation point")]
    PoleAtPoint,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (first offending entry at ({row}, {col}))")]
    NotHermitian { row: usize, col: usize },
    #[error("resource limit: {what} needs {needed}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("product minimum is negative ({0}); the block-positivity bound is undefined")]
    NonPositiveMu(f64),
    #[error("dimension too small: {0}")]
    DimensionTooSmall(String),
    #[error("bond dimension {0} is not a perfect square")]
    NotPerfectSquare(usize),
    #[error("map decomposition is not entanglement-breaking witnessed")]
    NotEbWitnessed,
    #[error("layer {layer} exceeds the declared norm bound ({norm} > {bound})")]
    UnboundedWindow { layer: u64, norm: f64, bound: f64 },
    #[error("entries are not rational: {0}")]
    NotRational(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("pipeline stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
