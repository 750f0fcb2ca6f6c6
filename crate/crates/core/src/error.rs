use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("word is not cyclically reduced: {0}")]
    NotCyclicallyReduced(String),

    #[error("word is empty")]
    EmptyWord,

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid square complex: {0}")]
    InvalidComplex(String),

    #[error("map is not combinatorial: {0}")]
    NotCombinatorial(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("unsupported cone: {0}")]
    UnsupportedCone(String),

    #[error("cycle of odd length {0}: subdivide the cone before building antipodal walls")]
    OddCycle(usize),

    #[error("invalid wall {index}: {reason}")]
    InvalidWall { index: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("collection is not malnormal: {0}")]
    NotMalnormal(String),

    #[error("search budget exhausted: {0}")]
    BudgetExceeded(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
