use thiserror::Error;

/// Errors raised while ingesting a matrix, decomposing it, or sampling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("matrix dimension {0} is too small (need p >= 2)")]
    DimensionTooSmall(usize),
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("matrix asymmetry {delta:e} exceeds tolerance {tolerance:e}")]
    AsymmetryTooLarge { delta: f64, tolerance: f64 },
    #[error("matrix is not positive semi-definite: eigenvalue {eigenvalue:e} below {bound:e}")]
    NotPositiveSemiDefinite { eigenvalue: f64, bound: f64 },
    #[error("matrix trace {0:e} is not positive")]
    ZeroTrace(f64),
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("rotation is not orthogonal (max deviation {0:e})")]
    NotOrthogonal(f64),
    #[error("eigenvalue list has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("categorical weights are all zero")]
    AllZeroWeights,
    #[error("categorical weight {0} is negative or not finite")]
    NegativeWeight(f64),
    #[error("invalid Beta shape ({alpha}, {beta})")]
    InvalidShape { alpha: f64, beta: f64 },

    #[error("degenerate recurrence state at j = {j}: a = {a:e}, b = {b:e}")]
    DegenerateState { j: usize, a: f64, b: f64 },
    #[error("degenerate angle distribution: c2 = {0:e}")]
    DegenerateAngle(f64),
    #[error("inconsistent draw state: {0}")]
    InconsistentState(String),
    #[error("point is not on the unit sphere (norm {0})")]
    NotOnSphere(f64),
    #[error("sample count must be at least 1")]
    EmptyBatch,

    #[error("rejection oracle stalled after {0} attempts")]
    OracleStalled(u64),

    #[error("could not parse matrix: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
