use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric: |M[{row}][{col}] - M[{col}][{row}]| = {deviation:e}")]
    NotSymmetric { row: usize, col: usize, deviation: f64 },

    #[error("invalid simplex point: {0}")]
    InvalidSimplexPoint(String),

    #[error("grid too fine: {count} points exceeds cap {cap}")]
    GridTooFine { count: u128, cap: usize },

    #[error("convex hull of an empty point set")]
    EmptyHull,

    #[error("negative factor entry {value:e} at ({row}, {col})")]
    NegativeFactorEntry { row: usize, col: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("linear program is not at an optimal solution")]
    LpNotOptimal,

    #[error("theta = {0} outside (0, 1); data set is internally inconsistent")]
    ThetaOutOfRange(f64),

    #[error("data modification precondition violated: {0}")]
    DamPrecondition(String),

    #[error("data modification did not terminate within {0} steps")]
    DamStepLimit(usize),

    #[error("copositive program is infeasible (restriction value {mu:e})")]
    Infeasible { mu: f64 },

    #[error("copositive program is unbounded below")]
    Unbounded,

    #[error("no grid point lies at distance >= {epsilon:e} from the immobile hull")]
    EmptyRestriction { epsilon: f64 },

    #[error("level cap {cap} exceeded without detecting a Slater point")]
    IterationCap { cap: usize },

    #[error("epsilon schedule exhausted at level {level}: {reason}")]
    EpsilonExhausted { level: usize, reason: String },

    #[error("support sets repeat across levels: {0}")]
    SupportRepeat(String),

    #[error("extended dual solution is infeasible: {0}")]
    DualInfeasible(String),

    #[error("point is not feasible for the program: min quadratic value {min_value:e}")]
    PrimalInfeasible { min_value: f64 },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
