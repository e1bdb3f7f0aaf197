//! Extremal eigenvalues of symmetric sparse operators.
//!
//! Small operators go through a full dense symmetric eigendecomposition.
//! Larger ones use an explicitly restarted Lanczos iteration with full
//! reorthogonalisation: `λ1` and `λn` are found directly, and `λ2` by running
//! the iteration again restricted to the orthogonal complement of the
//! converged `λ1` Ritz vector. Repeated top eigenvalues therefore come back
//! as `λ2 = λ1`, which is what a disconnected graph needs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::seed::rng_for;
use crate::sparse::SparseMatrix;

/// Largest dimension handled by the dense route under [`EigenMethod::Auto`].
pub const DENSE_LIMIT: usize = 2048;

const SYMMETRY_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-9;
const KRYLOV_DIM: usize = 120;
const MAX_RESTARTS: usize = 2000;

/// `λ1 ≥ λ2 ≥ λn` of a symmetric operator and `λ_max = max{λ2, |λn|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_n: f64,
    pub lambda_max: f64,
}

impl SpectrumSummary {
    fn from_sorted(desc: &[f64]) -> Self {
        let lambda1 = desc[0];
        if desc.len() == 1 {
            // No non-dominant eigenvalues: nothing is left to decay.
            return Self {
                lambda1,
                lambda2: lambda1,
                lambda_n: lambda1,
                lambda_max: 0.0,
            };
        }
        let lambda2 = desc[1];
        let lambda_n = desc[desc.len() - 1];
        Self {
            lambda1,
            lambda2,
            lambda_n,
            lambda_max: lambda2.max(lambda_n.abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    /// Dense up to [`DENSE_LIMIT`], iterative beyond.
    #[default]
    Auto,
    Dense,
    Iterative,
}

/// Extremal eigenvalues of a symmetric matrix.
pub fn eigen_extremes(m: &SparseMatrix) -> Result<SpectrumSummary, SpectralError> {
    eigen_extremes_with(m, EigenMethod::Auto)
}

pub fn eigen_extremes_with(
    m: &SparseMatrix,
    method: EigenMethod,
) -> Result<SpectrumSummary, SpectralError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(SpectralError::Empty);
    }
    if !m.is_symmetric(SYMMETRY_TOL) {
        return Err(SpectralError::Asymmetric);
    }
    let dense = match method {
        EigenMethod::Auto => rows <= DENSE_LIMIT,
        EigenMethod::Dense => true,
        EigenMethod::Iterative => rows < 3,
    };
    if dense {
        Ok(SpectrumSummary::from_sorted(&dense_eigenvalues(m)))
    } else {
        iterative_extremes(m)
    }
}

/// All eigenvalues of a symmetric sparse matrix, in descending order.
pub fn dense_eigenvalues(m: &SparseMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut dense = DMatrix::<f64>::zeros(n, n);
    for (r, c, v) in m.triplets() {
        dense[(r, c)] = v;
    }
    let mut values: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

fn iterative_extremes(m: &SparseMatrix) -> Result<SpectrumSummary, SpectralError> {
    let (lambda1, v1) = lanczos(m, Which::Largest, &[], "lanczos/top")?;
    let (lambda_n, _) = lanczos(m, Which::Smallest, &[], "lanczos/bottom")?;
    let (lambda2, _) = lanczos(m, Which::Largest, &[v1], "lanczos/second")?;
    // The restricted problem can only lose accuracy, never order.
    let lambda2 = lambda2.min(lambda1).max(lambda_n);
    Ok(SpectrumSummary {
        lambda1,
        lambda2,
        lambda_n,
        lambda_max: lambda2.max(lambda_n.abs()),
    })
}

#[derive(Clone, Copy)]
enum Which {
    Largest,
    Smallest,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for u in basis {
        let c = dot(v, u);
        axpy(-c, u, v);
    }
}

/// Restarted Lanczos on `m` restricted to the complement of `deflate`
/// (orthonormal vectors). Returns the requested extremal Ritz pair.
fn lanczos(
    m: &SparseMatrix,
    which: Which,
    deflate: &[Vec<f64>],
    label: &str,
) -> Result<(f64, Vec<f64>), SpectralError> {
    let n = m.rows();
    let dim = n - deflate.len();
    let krylov = KRYLOV_DIM.min(dim);
    let mut rng = rng_for(0, label);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    project_out(&mut start, deflate);
    normalize(&mut start);

    for _ in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(krylov);
        let mut beta: Vec<f64> = Vec::with_capacity(krylov);
        let mut breakdown = false;
        for j in 0..krylov {
            let mut w = m.matvec(&basis[j]).expect("square operator");
            project_out(&mut w, deflate);
            let a = dot(&w, &basis[j]);
            alpha.push(a);
            // Full reorthogonalisation, applied twice.
            for _ in 0..2 {
                project_out(&mut w, &basis);
                project_out(&mut w, deflate);
            }
            let b = normalize(&mut w);
            if j + 1 == krylov {
                beta.push(b);
                break;
            }
            if b < 1e-12 {
                beta.push(0.0);
                breakdown = true;
                break;
            }
            beta.push(b);
            basis.push(w);
        }

        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let pick = (0..k)
            .max_by(|&a, &b| {
                let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[b]);
                match which {
                    Which::Largest => x.total_cmp(&y),
                    Which::Smallest => y.total_cmp(&x),
                }
            })
            .expect("non-empty Krylov space");
        let theta = eig.eigenvalues[pick];
        let y = eig.eigenvectors.column(pick);

        let mut ritz = vec![0.0; n];
        for (i, v) in basis.iter().enumerate().take(k) {
            axpy(y[i], v, &mut ritz);
        }
        project_out(&mut ritz, deflate);
        normalize(&mut ritz);

        let residual = if breakdown {
            0.0
        } else {
            let mut r = m.matvec(&ritz).expect("square operator");
            project_out(&mut r, deflate);
            axpy(-theta, &ritz, &mut r);
            dot(&r, &r).sqrt()
        };
        if residual <= RESIDUAL_TOL || breakdown || k == dim {
            return Ok((theta, ritz));
        }
        start = ritz;
    }
    Err(SpectralError::NoConvergence)
}
