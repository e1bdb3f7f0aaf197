use super::{ModelError, ResidualKind};
use crate::autodiff::{Tape, Var};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    /// Leave the pre-activation untouched (the softmax lives in the loss).
    Identity,
}

/// `activation(Â · h · w + bias)`.
pub fn sgc_layer<'a>(
    tape: &mut Tape<'a>,
    a_hat: &'a SparseMatrix,
    h: Var,
    w: Var,
    bias: Option<Var>,
    activation: Activation,
) -> Result<Var, ModelError> {
    let hw = tape.matmul(h, w)?;
    let mut z = tape.spmm(a_hat, hw)?;
    if let Some(b) = bias {
        z = tape.add_bias_row(z, b)?;
    }
    Ok(match activation {
        Activation::Relu => tape.relu(z),
        Activation::Sigmoid => tape.sigmoid(z),
        Activation::Identity => z,
    })
}

/// Residual term of width `width` for one layer. `None` yields an all-zero
/// constant; the other kinds take `h_prev` or `x` as source, multiply by
/// `w_adj` when given and propagate through `a_hat` for the graph kinds.
pub fn residual_term<'a>(
    tape: &mut Tape<'a>,
    kind: ResidualKind,
    h_prev: Var,
    x: Var,
    a_hat: &'a SparseMatrix,
    w_adj: Option<Var>,
    width: usize,
) -> Result<Var, ModelError> {
    let source = match kind {
        ResidualKind::None => {
            let rows = tape.shape(h_prev).0;
            return Ok(tape.constant(crate::Matrix::zeros((rows, width))));
        }
        ResidualKind::Raw | ResidualKind::GraphRaw => x,
        ResidualKind::Naive | ResidualKind::GraphNaive | ResidualKind::LazyNaive => h_prev,
    };
    let src_width = tape.shape(source).1;
    let mut r = match w_adj {
        Some(w) => tape.matmul(source, w)?,
        None if src_width != width => {
            return Err(ModelError::MissingAdjust {
                src: src_width,
                tgt: width,
            })
        }
        None => source,
    };
    if kind.is_graph() {
        r = tape.spmm(a_hat, r)?;
    }
    let got = tape.shape(r).1;
    if got != width {
        return Err(ModelError::WidthMismatch {
            residual: got,
            layer: width,
        });
    }
    Ok(r)
}
