//! Representation distances between nodes once propagation has mixed, and
//! the vector p-norm they are measured with.

use super::SpectralError;
use crate::graph::Graph;
use crate::sparse::SparseMatrix;
use crate::Matrix;

/// `d_x · |d(i) - d(j)| / (2|E|)`: the L1 gap between two rows of the
/// degree-proportional stationary representation.
pub fn degree_representation_distance(
    g: &Graph,
    i: usize,
    j: usize,
    d_x: usize,
) -> Result<f64, SpectralError> {
    let n = g.node_count();
    for node in [i, j] {
        if node >= n {
            return Err(SpectralError::Node(node));
        }
    }
    if g.edge_count() == 0 {
        return Err(SpectralError::NoEdges);
    }
    let gap = g.degree(i).abs_diff(g.degree(j)) as f64;
    Ok(d_x as f64 * gap / (2 * g.edge_count()) as f64)
}

/// `‖(Â(i,:) - Â(j,:)) · X‖₁` for one propagation step.
pub fn feature_representation_distance(
    a_hat: &SparseMatrix,
    x: &Matrix,
    i: usize,
    j: usize,
) -> Result<f64, SpectralError> {
    if a_hat.cols() != x.nrows() {
        return Err(SpectralError::Shape(format!(
            "operator {:?} against features {:?}",
            a_hat.shape(),
            x.dim()
        )));
    }
    for node in [i, j] {
        if node >= a_hat.rows() {
            return Err(SpectralError::Node(node));
        }
    }
    if i == j {
        return Ok(0.0);
    }
    let mut diff = vec![0.0; x.ncols()];
    for (c, v) in a_hat.row(i) {
        for (d, xv) in diff.iter_mut().zip(x.row(c)) {
            *d += v * xv;
        }
    }
    for (c, v) in a_hat.row(j) {
        for (d, xv) in diff.iter_mut().zip(x.row(c)) {
            *d -= v * xv;
        }
    }
    Ok(diff.iter().map(|d| d.abs()).sum())
}

/// Standard vector p-norm; `p = f64::INFINITY` gives the max norm.
pub fn p_norm(v: &[f64], p: f64) -> Result<f64, SpectralError> {
    if !(p >= 1.0) {
        return Err(SpectralError::NormOrder(p));
    }
    if p.is_infinite() {
        return Ok(v.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    if p == 1.0 {
        return Ok(v.iter().map(|x| x.abs()).sum());
    }
    if p == 2.0 {
        return Ok(v.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    Ok(v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p))
}
