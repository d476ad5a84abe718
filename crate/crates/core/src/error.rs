use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph is non-planar ({kind} witness with {} edges)", edges.len())]
    NonPlanar { kind: String, edges: Vec<(usize, usize)> },
    #[error("length-constrained diameter is infinite")]
    InfiniteDiameter,
    #[error("no balanced fundamental cycle")]
    NoBalancedCycle,
    #[error("instance is infeasible")]
    Infeasible,
    #[error("edge {0} is a tree edge")]
    TreeEdge(usize),
    #[error("cycle is not simple")]
    NotSimpleCycle,
    #[error("guess space of {0} exceeds the configured cap")]
    GuessBudgetExceeded(u128),
    #[error("instance too large for exact solver: {0}")]
    TooLarge(String),
    #[error("layered graph too large: {0} layers")]
    LayerCapExceeded(u64),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
