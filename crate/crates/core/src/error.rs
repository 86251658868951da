use std::io;

use thiserror::Error;

pub type Result<T, E = PoolError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("node index {index} out of range for graph with {num_nodes} nodes")]
    IndexOutOfRange { index: usize, num_nodes: usize },
    #[error("non-finite edge weight on ({src}, {dst})")]
    NonFiniteWeight { src: usize, dst: usize },
    #[error("feature matrix has {rows} rows, expected {expected}")]
    FeatureShapeMismatch { rows: usize, expected: usize },
    #[error("label vector has length {len}, expected {expected}")]
    LabelShapeMismatch { len: usize, expected: usize },
    #[error("graphs in batch have feature widths {0} and {1}")]
    FeatureWidthMismatch(usize, usize),
    #[error("operation requires a symmetric adjacency")]
    AsymmetricInput,
    #[error("operation requires non-negative edge weights")]
    NegativeWeight,
    #[error("unknown reduction `{0}` (expected sum, mean or max)")]
    UnknownReduce(String),
    #[error("graph {0} of the batch has no nodes")]
    EmptyGraphInBatch(usize),
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("power iteration did not converge in {0} iterations")]
    PowerIterationNoConvergence(usize),
    #[error("NMF did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("node {0} cannot reach any kept node")]
    UnreachableNode(usize),
    #[error("elimination block of the Laplacian is singular")]
    SingularEliminationBlock,
    #[error("connector `{connector}` cannot be used with selector `{selector}`")]
    IncompatibleConnector {
        selector: &'static str,
        connector: &'static str,
    },
    #[error("graph too large for {op}: {size} > {limit}")]
    TooLarge {
        op: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("degree trace is zero (graph has no edge mass)")]
    ZeroDegreeTrace,
    #[error("graph has no edges")]
    ZeroEdges,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown loss term `{0}`")]
    UnknownLoss(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cache fingerprint {found:#018x} does not match configuration {expected:#018x}")]
    StaleCache { expected: u64, found: u64 },
    #[error("corrupt cache record {index}: {reason}")]
    CorruptRecord { index: usize, reason: String },
    #[error("graph {0} is missing from the cache")]
    MissingRecord(usize),
    #[error("graph {0} did not converge during pre-coarsening")]
    NotConvergedRecord(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}
