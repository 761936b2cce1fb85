use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: lower endpoint exceeds upper (or NaN endpoint)")]
    InvalidInterval,

    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,

    #[error("singular matrix: pivot below threshold at column {col}")]
    SingularMatrix { col: usize },

    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("system is not square: {n_eqs} equations, {n_vars} variables")]
    NonSquareSystem { n_eqs: usize, n_vars: usize },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("homotopy time range not contained in [0,1]")]
    PathRangeError,

    #[error("time derivative requested at a polyline breakpoint")]
    BreakpointDerivative,

    #[error("refinement did not converge within {0} iterations")]
    RefineDivergence(usize),

    #[error("step size underflow (h < {h_min}); path may approach the discriminant")]
    StepUnderflow { h_min: String },

    #[error("step budget of {0} tracking steps exceeded")]
    StepBudgetExceeded(usize),

    #[error("seed certification failed: {0}")]
    SeedCertificationFailed(String),

    #[error("box matching undecidable after {0} refinement rounds")]
    MatchUndecidable(usize),

    #[error("edge ({u},{v}) failed while tracking fiber point {index}: {cause}")]
    EdgeTrackFailure {
        u: usize,
        v: usize,
        index: usize,
        cause: String,
    },

    #[error("quarantined edges disconnect the homotopy graph")]
    GraphDisconnected,

    #[error("graph is not saturated")]
    NotSaturated,

    #[error("group is not transitive")]
    NotTransitive,

    #[error("permutation degrees differ: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("group order {order} exceeds the exact-mode cap {cap}")]
    OrderCapExceeded { order: u128, cap: u128 },

    #[error("family `{family}` requires even degree, got {degree}")]
    UnsupportedDegreeParity { family: String, degree: usize },

    #[error("degenerate slice forms; resample")]
    SliceDegenerate,

    #[error("sampled rotation hit the Cayley singularity; resample")]
    CayleyDegenerate,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
