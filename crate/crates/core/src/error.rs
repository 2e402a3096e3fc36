use thiserror::Error;

use crate::graph::{EdgeId, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown edge {0:?}")]
    UnknownEdge(EdgeId),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(VertexId),
    #[error("edge weight must be positive and finite, got {0}")]
    NonPositiveWeight(f64),
    #[error("edge id {0:?} is already in use")]
    DuplicateEdge(EdgeId),
    #[error("stage {got} does not follow stage {last}")]
    StageMismatch { last: u64, got: u64 },
    #[error("parameter out of range: {0}")]
    ParameterTooSmall(String),
    #[error("input graph must be unweighted")]
    WeightedInput,
    #[error("vertex {0:?} is not covered by the contraction map")]
    UncoveredVertex(VertexId),
    #[error("graph has {n} vertices, exact enumeration is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("decomposition did not terminate within {rounds} rounds")]
    RecursionBudgetExceeded { rounds: usize },
    #[error("deletion budget of {budget} exhausted")]
    DeletionBudgetExceeded { budget: usize },
    #[error("connected components of the two graphs differ")]
    KernelMismatch,
    #[error("h contains an edge ({0}, {1}) that is not in g")]
    NotSubgraph(usize, usize),
    #[error("epsilon must lie in {range}, got {eps}")]
    BadEpsilon { eps: f64, range: &'static str },
    #[error("sparsifier output carries no expander certificate")]
    MissingCertificate,
    #[error("problem kinds differ across union parts")]
    KindMismatch,
    #[error("no leaf has spare capacity")]
    CapacityExceeded,
    #[error("strategy has no legal move left")]
    StrategyExhausted,
    #[error("terminals {0:?} and {1:?} are disconnected")]
    PairDisconnected(VertexId, VertexId),
    #[error("flow for commodity {0} does not have unit value")]
    UnnormalizedFlow(usize),
    #[error("demand pair has an infinite-capacity path")]
    UnboundedFlow,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
