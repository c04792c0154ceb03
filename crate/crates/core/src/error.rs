use thiserror::Error;

/// Errors produced while loading inputs or running a solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },

    #[error("line {line}: vertex {vertex} is out of bounds for n = {n}")]
    VertexOutOfBounds { line: usize, vertex: usize, n: usize },

    #[error("no feature row for vertex {0}")]
    MissingRow(usize),

    #[error("line {line}: duplicate feature row for vertex {vertex}")]
    DuplicateRow { line: usize, vertex: usize },

    #[error("line {line}: non-finite feature value for vertex {vertex}")]
    NonFinite { line: usize, vertex: usize },

    #[error("line {line}: expected {expected} feature values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("vertex {vertex} has in-degree {in_degree}, the graph is not a forest of arborescences")]
    InDegree { vertex: usize, in_degree: usize },

    #[error("vertex {0} lies on a directed cycle, the graph is not a forest of arborescences")]
    Cycle(usize),

    #[error("centroid of group {0} is undefined")]
    UndefinedCentroid(usize),

    #[error("{what}: expected {expected}, found {found}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("exhaustive search over {k}^{n} assignments exceeds the limit of {limit}")]
    SearchTooLarge { n: usize, k: usize, limit: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
