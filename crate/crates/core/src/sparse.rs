//! Compressed sparse row matrices and the sparse-dense product.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("shape mismatch: {op} of {left:?} with {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

/// Row-compressed real matrix.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicate
    /// coordinates are summed; entries that end up exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, SparseError> {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(SparseError::OutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
            per_row[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in per_row {
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(m: &Matrix) -> Self {
        let (rows, cols) = m.dim();
        let triplets = m
            .indexed_iter()
            .filter(|(_, &v)| v != 0.0)
            .map(|((r, c), &v)| (r, c, v));
        Self::from_triplets(rows, cols, triplets).expect("indices come from the matrix itself")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => 0.0,
        }
    }

    /// Iterates over every stored entry as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Matrix {
        let mut out = Array2::zeros((self.rows, self.cols));
        for (r, c, v) in self.triplets() {
            out[[r, c]] = v;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v)))
            .expect("transposed coordinates stay in bounds")
    }

    /// `true` when `|m(i,j) - m(j,i)| <= tol` for every stored entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && self
                .triplets()
                .all(|(r, c, v)| (v - self.get(c, r)).abs() <= tol)
    }

    /// Column sums.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for (_, c, v) in self.triplets() {
            sums[c] += v;
        }
        sums
    }

    /// `alpha * self + beta * I`.
    pub fn scale_add_identity(&self, alpha: f64, beta: f64) -> Result<Self, SparseError> {
        if self.rows != self.cols {
            return Err(SparseError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let scaled = self.triplets().map(|(r, c, v)| (r, c, alpha * v));
        let diag = (0..self.rows).map(|i| (i, i, beta));
        Self::from_triplets(self.rows, self.cols, scaled.chain(diag))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.cols {
            return Err(SparseError::Shape {
                op: "matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect())
    }

    /// Dense view of the selected columns of row `i`, as a length-`cols` vector.
    pub fn row_dense(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (c, v) in self.row(i) {
            out[c] = v;
        }
        out
    }
}

/// Sparse-dense product `m · x`.
pub fn spmm(m: &SparseMatrix, x: &Matrix) -> Result<Matrix, SparseError> {
    if m.cols != x.nrows() {
        return Err(SparseError::Shape {
            op: "spmm",
            left: m.shape(),
            right: x.dim(),
        });
    }
    let mut out = Array2::zeros((m.rows, x.ncols()));
    for (r, mut out_row) in out.rows_mut().into_iter().enumerate() {
        for (c, v) in m.row(r) {
            out_row.scaled_add(v, &x.row(c));
        }
    }
    Ok(out)
}

/// Transposed sparse-dense product `mᵀ · x`, without materialising `mᵀ`.
pub fn spmm_transpose(m: &SparseMatrix, x: &Matrix) -> Result<Matrix, SparseError> {
    if m.rows != x.nrows() {
        return Err(SparseError::Shape {
            op: "spmm_transpose",
            left: (m.cols, m.rows),
            right: x.dim(),
        });
    }
    let mut out = Array2::zeros((m.cols, x.ncols()));
    for r in 0..m.rows {
        let src = x.row(r);
        for (c, v) in m.row(r) {
            out.row_mut(c).scaled_add(v, &src);
        }
    }
    Ok(out)
}
