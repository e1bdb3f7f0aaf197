//! Spectral analysis of stacked graph propagation.
//!
//! With identity weight matrices a deep GCN is just the power iteration
//! `T(k) = M T(k-1)`. This module measures how fast that iteration collapses
//! onto its fixed point: the extremal eigenvalues of `M`, the stationary
//! distribution of the walk, the closed-form depth bound
//! `⌈log(ε/√n) / log λ_max⌉`, and the empirically observed depth.

mod distance;
mod eigen;
mod limit;

pub use distance::{degree_representation_distance, feature_representation_distance, p_norm};
pub use eigen::{
    dense_eigenvalues, eigen_extremes, eigen_extremes_with, EigenMethod, SpectrumSummary,
    DENSE_LIMIT,
};
pub use limit::{
    analyze_limit, broadcast_stationary, empirical_animation_limit, empirical_limit_to,
    lazy_limit_bound, matrix_l1_distance, stationary_distribution, symmetric_fixed_point,
    theoretical_limit_bound, LimitDepth, LimitOptions, LimitReport, OperatorKind,
    StationaryDistribution,
};

use thiserror::Error;

use crate::graph::GraphError;
use crate::sparse::SparseError;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("operator is not symmetric within tolerance")]
    Asymmetric,
    #[error("operator has no rows")]
    Empty,
    #[error("iterative eigensolver did not converge")]
    NoConvergence,
    #[error("no unique stationary distribution: {0} (the chain must be irreducible and aperiodic)")]
    NoUniqueStationary(&'static str),
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("column {column} of the feature matrix sums to {sum}, expected 1")]
    NotColumnNormalized { column: usize, sum: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("node id {0} out of range")]
    Node(usize),
    #[error("graph has no edges")]
    NoEdges,
    #[error("p-norm needs p >= 1, got {0}")]
    NormOrder(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
}
