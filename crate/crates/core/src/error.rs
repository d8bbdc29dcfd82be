use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spatial dimension must be at least 1")]
    ZeroDimension,

    #[error("lp exponent must be positive, got {0}")]
    InvalidExponent(f64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires a non-empty {0}")]
    Empty(&'static str),

    #[error("multi-index set is not downward closed: {0:?} has a missing predecessor")]
    NotDownwardClosed(Vec<usize>),

    #[error("duplicate point {0} in generating sequence")]
    DuplicatePoint(f64),

    #[error("degenerate box in dimension {dim}: lo = {lo}, hi = {hi}")]
    DegenerateBox { dim: usize, lo: f64, hi: f64 },

    #[error("under-determined system: {points} data points for {terms} basis terms")]
    Underdetermined { points: usize, terms: usize },

    #[error("matrix is rank deficient: numerical rank {rank} < {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("too few usable probes for a decay fit: {0}")]
    InsufficientProbes(usize),

    #[error("unknown test function tag '{0}'")]
    UnknownFunction(String),

    #[error("dimension {requested} exceeds the supported maximum {max}")]
    UnsupportedDimension { requested: usize, max: usize },

    #[error("unfitted leaf owns global node {node:?}")]
    UnfittedLeaf { node: Vec<f64> },

    #[error("CSV error at line {line}: {msg}")]
    Csv { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
