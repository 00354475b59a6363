use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown entropy function family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameters for `{family}`: {reason}")]
    InvalidParams { family: String, reason: String },

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("infeasible targets: liminf {liminf} must not exceed limsup {limsup}")]
    InfeasibleTargets { liminf: f64, limsup: f64 },

    #[error("construction did not reach its targets: {0}")]
    ConstructionFailed(String),

    #[error("evaluation of `{name}` failed at log2 x = {log2_x}: {reason}")]
    Evaluation {
        name: String,
        log2_x: f64,
        reason: String,
    },

    #[error("numerical failure after n = {deepest_valid}: {reason}")]
    Numeric { deepest_valid: u64, reason: String },

    #[error("distribution mass {mass} is outside 1 ± 1e-9")]
    MassMismatch { mass: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("atom count {count} exceeds cap {cap}; use the type-class path instead")]
    AtomCap { count: usize, cap: usize },

    #[error("inconsistent refinement: {0}")]
    InconsistentRefinement(String),

    #[error("level {n} exceeds the enumeration budget: {reason}")]
    Budget { n: u64, reason: String },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("stage not materialized: {0}")]
    NotMaterialized(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("search horizon {horizon} exhausted: {reason}")]
    HorizonExhausted { horizon: u64, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
