//! Graph residual networks (GResNet) and the spectral analysis of why deep
//! vanilla graph convolutional networks stop learning.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`] and [`sparse`]: undirected graphs, compressed-row matrices and
//!   the adjacency-derived propagation operators.
//! - [`spectral`]: extremal eigenvalues, stationary distributions, the
//!   closed-form and empirical depth limits, and the representation distance
//!   diagnostics.
//! - [`autodiff`]: a small reverse-mode engine over dense matrices, the Adam
//!   optimizer and the gradient-norm probe.
//! - [`model`]: the spectral graph convolution layer, the vanilla stack and
//!   every residual variant, plus training and checkpoints.
//! - [`dataset`]: Planetoid-style citation loaders, feature normalisation and
//!   transductive splits.

pub mod autodiff;
pub mod dataset;
pub mod graph;
pub mod model;
pub mod seed;
pub mod sparse;
pub mod spectral;

/// Dense row-major real matrix used for features, activations and weights.
pub type Matrix = ndarray::Array2<f64>;

pub use graph::Graph;
pub use sparse::SparseMatrix;
