use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector is not unit length (norm {norm})")]
    NonUnitVector { norm: f64 },

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid POVM: {reason} (violation {violation:.3e})")]
    InvalidPovm { reason: String, violation: f64 },

    #[error("extremal POVMs have 2 to 4 outcomes, got {0}")]
    OutcomeCount(usize),

    #[error("sampling an extremal {n}-outcome POVM failed after {attempts} attempts")]
    Sampling { n: usize, attempts: usize },

    #[error("directions are not coplanar (residual {residual:.3e})")]
    NotCoplanar { residual: f64 },

    #[error("directions {0} and {1} are parallel")]
    ParallelDirections(usize, usize),

    #[error("directions do not surround the origin in their plane")]
    UnbalancedDirections,

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("no shipped Lebedev table of order {0}")]
    UnknownLebedevOrder(u32),

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("grid file line {line}: {msg}")]
    GridParse { line: usize, msg: String },

    #[error("unrecognised grid spec `{0}` (expected lebedev:N, product:PxA or file:PATH)")]
    GridSpec(String),

    #[error("response entry p({outcome}|{label}) = {value:.3e} is negative")]
    NegativeResponse {
        outcome: String,
        label: String,
        value: f64,
    },

    #[error("response table and parent do not share region labels ({0})")]
    LabelMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("bisection bracket failed: {0}")]
    Bracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
