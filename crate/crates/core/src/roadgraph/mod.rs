//! Directed road network, three-node motif census and the motif Laplacian
//! used as the spectral basis for graph convolution.

mod graph;
mod laplacian;
mod motif;

pub use graph::DirectedRoadGraph;
pub use laplacian::{
    estimate_lambda_max, motif_laplacian, normalized_laplacian, rescale_laplacian, GraphLaplacian,
    LaplacianKind, LAMBDA_MAX_FALLBACK,
};
pub use motif::{count_motif_participation, MotifAdjacency, MotifClass};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph needs at least {required} nodes, got {got}")]
    TooFewNodes { required: usize, got: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge ({source_id}, {target}) references a node outside 0..{node_count}")]
    NodeOutOfRange {
        source_id: usize,
        target: usize,
        node_count: usize,
    },
    #[error("edge list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("weight matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("negative weight {value} at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, value: f64 },
    #[error("weight matrix is not symmetric at ({row}, {col}); enable symmetrization")]
    Asymmetric { row: usize, col: usize },
    #[error("lambda_max must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("permutation of length {got} does not match node count {expected}")]
    BadPermutation { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
