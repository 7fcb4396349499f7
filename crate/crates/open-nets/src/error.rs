use thiserror::Error;

/// Errors produced by construction and composition of open networks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("maps share no common domain: left has domain {left}, right has domain {right}")]
    DomainMismatch { left: String, right: String },

    #[error("interface mismatch: expected {expected}, found {found}")]
    InterfaceMismatch { expected: String, found: String },

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("edge {id:?} has non-positive rate {rate}")]
    InvalidRate { id: String, rate: f64 },

    #[error("matrix is not infinitesimal stochastic: {0}")]
    NotInfinitesimalStochastic(String),

    #[error("step dt = {dt} is unstable for this generator; use dt < {suggested}")]
    UnstableStep { dt: f64, suggested: f64 },

    #[error("affinity undefined between {i:?} and {j:?}: a directed flow term vanishes")]
    AffinityUndefined { i: String, j: String },

    #[error("input is not steady on internal states: residual {residual:e} exceeds {tol:e}")]
    NotSteady { residual: f64, tol: f64 },

    #[error("equilibrium values disagree on glued states: {states:?}")]
    EquilibriumMismatch { states: Vec<String> },

    #[error("non-positive probability at {label:?}: {value}")]
    NonpositiveProbability { label: String, value: f64 },

    #[error("negative entry at {label:?}: {value}")]
    NegativeEntry { label: String, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("detailed balance violated between {i:?} and {j:?}: conductances {forward} vs {backward}")]
    DetailedBalanceViolation {
        i: String,
        j: String,
        forward: f64,
        backward: f64,
    },

    #[error("function {0:?} failed the convexity probe")]
    NotConvex(String),

    #[error("linear system has no solution: {0}")]
    SingularSystem(String),

    #[error("malformed boundary tuple: {0}")]
    MalformedTuple(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("vector field is not linear: {0}")]
    NonlinearField(String),

    #[error("normalization requested on a disconnected graph; scaling is ambiguous per component")]
    DisconnectedNormalization,

    #[error("invalid document: {0}")]
    InvalidDocument(String),

    #[error("cannot compose documents of kind {left:?} and {right:?}")]
    KindMismatch { left: String, right: String },

    #[error("integration rejected: concentration went negative ({species:?} = {value:e}); reduce dt")]
    NegativeConcentration { species: String, value: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
