use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("multi-index {alpha:?} exceeds degree cap {cap:?}")]
    DegreeOutOfRange { alpha: Vec<usize>, cap: Vec<usize> },

    #[error("degree cap exceeded: {0}")]
    DegreeCap(String),

    #[error("point {point:?} lies outside the admissible region: {reason}")]
    OutsideDomain { point: Vec<String>, reason: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite integrand value {value} at node {node:?}")]
    NonFiniteIntegrand { value: f64, node: Vec<String> },

    #[error("overflow in weight alpha!/(q)_alpha at alpha = {0:?}")]
    WeightOverflow(Vec<usize>),

    #[error("identically zero input")]
    ZeroInput,

    #[error("root {root} lies within {delta:e} of the unit circle")]
    BoundaryRoot { root: String, delta: f64 },

    #[error("root certification failed: residual {residual:e} exceeds {threshold:e} at {root}")]
    RootResidual { root: String, residual: f64, threshold: f64 },

    #[error("zero crossing detected while tracking the argument at {0}")]
    ZeroCrossing(String),

    #[error("phi contract violated: {0}")]
    PhiContract(String),

    #[error("degenerate search space: {rejected} of {evaluations} evaluations rejected")]
    DegenerateSearch { rejected: usize, evaluations: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn fmt_point(z: &[num_complex::Complex64]) -> Vec<String> {
    z.iter().map(|c| format!("{c}")).collect()
}
