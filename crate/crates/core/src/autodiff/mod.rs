//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] records every operation of one forward pass. Calling
//! [`Tape::backward`] on a scalar node walks the record in reverse and
//! returns the gradient of every node that depends on a `requires_grad`
//! leaf. A tape is built per training step and dropped afterwards.
//!
//! Sparse operands (the propagation operator) are constants: no gradient
//! flows into graph structure.

mod optim;
mod probe;

pub use optim::{adam_step, glorot_init, AdamConfig, AdamState};
pub use probe::{grad_norm_probe, GradNormProbe, RATIO_FLOOR};

use std::borrow::Cow;

use ndarray::{Array2, Axis};
use rand::Rng as _;
use thiserror::Error;

use crate::seed::Rng;
use crate::sparse::{spmm, spmm_transpose, SparseMatrix};
use crate::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("loss must be a 1x1 tensor, got {0:?}")]
    NonScalarLoss((usize, usize)),
    #[error("mask selects no rows")]
    EmptyMask,
    #[error("mask row {0} is out of range")]
    MaskRow(usize),
    #[error("label row {0} is not one-hot")]
    NotOneHot(usize),
    #[error("dropout rate must lie in [0, 1), got {0}")]
    DropoutRate(f64),
    #[error("matrix dimensions must be positive, got {0}x{1}")]
    Dimension(usize, usize),
    #[error("tensor {0} carries no gradient")]
    MissingGradient(usize),
    #[error("optimizer state does not match parameter {0}")]
    StateMismatch(usize),
}

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op<'a> {
    Leaf,
    MatMul(Var, Var),
    SpMM(&'a SparseMatrix, Var),
    Add(Var, Var),
    AddBias(Var, Var),
    Relu(Var),
    Sigmoid(Var),
    Dropout(Var, Matrix),
    Sum(Var),
    SoftmaxCrossEntropy {
        logits: Var,
        probs: Matrix,
        targets: Vec<(usize, usize)>,
    },
}

struct Node<'a> {
    value: Cow<'a, Matrix>,
    requires_grad: bool,
    op: Op<'a>,
}

/// Recorded forward pass.
#[derive(Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

/// Gradients produced by [`Tape::backward`], indexed by [`Var`].
#[derive(Debug, Clone)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    pub fn take(&mut self, v: Var) -> Option<Matrix> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

fn check_same(op: &'static str, a: (usize, usize), b: (usize, usize)) -> Result<(), AutodiffError> {
    if a == b {
        Ok(())
    } else {
        Err(AutodiffError::Shape {
            op,
            left: a,
            right: b,
        })
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Cow<'a, Matrix>, requires_grad: bool, op: Op<'a>) -> Var {
        self.nodes.push(Node {
            value,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Trainable leaf owning its value.
    pub fn param(&mut self, value: Matrix) -> Var {
        self.push(Cow::Owned(value), true, Op::Leaf)
    }

    /// Leaf that never receives a gradient.
    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(Cow::Owned(value), false, Op::Leaf)
    }

    /// Borrowed leaf; `requires_grad` decides whether backward reaches it.
    pub fn leaf_ref(&mut self, value: &'a Matrix, requires_grad: bool) -> Var {
        self.push(Cow::Borrowed(value), requires_grad, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.dim()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.needs(v)
    }

    /// Scalar value of a 1x1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[[0, 0]]
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.1 != sb.0 {
            return Err(AutodiffError::Shape {
                op: "matmul",
                left: sa,
                right: sb,
            });
        }
        let out = self.value(a).dot(self.value(b));
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(Cow::Owned(out), rg, Op::MatMul(a, b)))
    }

    /// `m · x` with a constant sparse `m`.
    pub fn spmm(&mut self, m: &'a SparseMatrix, x: Var) -> Result<Var, AutodiffError> {
        let out = spmm(m, self.value(x)).map_err(|_| AutodiffError::Shape {
            op: "spmm",
            left: m.shape(),
            right: self.shape(x),
        })?;
        let rg = self.needs(x);
        Ok(self.push(Cow::Owned(out), rg, Op::SpMM(m, x)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AutodiffError> {
        check_same("add", self.shape(a), self.shape(b))?;
        let out = self.value(a) + self.value(b);
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(Cow::Owned(out), rg, Op::Add(a, b)))
    }

    /// Adds a `1 × cols` bias row to every row of `a`.
    pub fn add_bias_row(&mut self, a: Var, bias: Var) -> Result<Var, AutodiffError> {
        let (sa, sb) = (self.shape(a), self.shape(bias));
        if sb != (1, sa.1) {
            return Err(AutodiffError::Shape {
                op: "add_bias_row",
                left: sa,
                right: sb,
            });
        }
        let out = self.value(a) + self.value(bias);
        let rg = self.needs(a) || self.needs(bias);
        Ok(self.push(Cow::Owned(out), rg, Op::AddBias(a, bias)))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = self.value(x).mapv(|v| v.max(0.0));
        let rg = self.needs(x);
        self.push(Cow::Owned(out), rg, Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let out = self.value(x).mapv(sigmoid);
        let rg = self.needs(x);
        self.push(Cow::Owned(out), rg, Op::Sigmoid(x))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let out = Array2::from_elem((1, 1), self.value(x).sum());
        let rg = self.needs(x);
        self.push(Cow::Owned(out), rg, Op::Sum(x))
    }

    /// Inverted dropout. Returns `x` itself when not training or when the
    /// rate is zero.
    pub fn dropout(
        &mut self,
        x: Var,
        rate: f64,
        rng: &mut Rng,
        training: bool,
    ) -> Result<Var, AutodiffError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(AutodiffError::DropoutRate(rate));
        }
        if !training || rate == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 / (1.0 - rate);
        let mask = Array2::from_shape_simple_fn(self.shape(x), || {
            if rng.gen::<f64>() < rate {
                0.0
            } else {
                keep
            }
        });
        let out = self.value(x) * &mask;
        let rg = self.needs(x);
        Ok(self.push(Cow::Owned(out), rg, Op::Dropout(x, mask)))
    }

    /// Mean over `mask` rows of `-log softmax(logits)[true class]`, with the
    /// row maximum subtracted before exponentiating.
    pub fn softmax_cross_entropy(
        &mut self,
        logits: Var,
        labels: &Matrix,
        mask: &[usize],
    ) -> Result<Var, AutodiffError> {
        if mask.is_empty() {
            return Err(AutodiffError::EmptyMask);
        }
        check_same("softmax_cross_entropy", self.shape(logits), labels.dim())?;
        let z = self.value(logits);
        let mut targets = Vec::with_capacity(mask.len());
        for &r in mask {
            if r >= z.nrows() {
                return Err(AutodiffError::MaskRow(r));
            }
            targets.push((r, one_hot_class(labels, r)?));
        }
        let mut probs = Array2::zeros(z.dim());
        let mut total = 0.0;
        for &(r, class) in &targets {
            let row = z.row(r);
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let denom: f64 = row.iter().map(|v| (v - max).exp()).sum();
            let lse = max + denom.ln();
            total += lse - row[class];
            for (p, v) in probs.row_mut(r).iter_mut().zip(row) {
                *p = (v - max).exp() / denom;
            }
        }
        let loss = total / targets.len() as f64;
        let rg = self.needs(logits);
        Ok(self.push(
            Cow::Owned(Array2::from_elem((1, 1), loss)),
            rg,
            Op::SoftmaxCrossEntropy {
                logits,
                probs,
                targets,
            },
        ))
    }

    /// Propagates `∂loss/∂·` to every node that requires a gradient.
    /// Contributions from several consumers are summed in reverse record
    /// order, so the result is reproducible bit for bit.
    pub fn backward(&self, loss: Var) -> Result<Gradients, AutodiffError> {
        let shape = self.shape(loss);
        if shape != (1, 1) {
            return Err(AutodiffError::NonScalarLoss(shape));
        }
        let mut grads: Vec<Option<Matrix>> = vec![None; self.nodes.len()];
        if !self.needs(loss) {
            return Ok(Gradients { grads });
        }
        grads[loss.0] = Some(Array2::ones((1, 1)));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    if self.needs(*a) {
                        let ga = g.dot(&self.value(*b).t());
                        accumulate(&mut grads, *a, ga);
                    }
                    if self.needs(*b) {
                        let gb = self.value(*a).t().dot(&g);
                        accumulate(&mut grads, *b, gb);
                    }
                }
                Op::SpMM(m, x) => {
                    if self.needs(*x) {
                        let gx = spmm_transpose(m, &g).expect("shapes checked on record");
                        accumulate(&mut grads, *x, gx);
                    }
                }
                Op::Add(a, b) => {
                    if self.needs(*b) {
                        accumulate(&mut grads, *b, g.clone());
                    }
                    if self.needs(*a) {
                        accumulate(&mut grads, *a, g.clone());
                    }
                }
                Op::AddBias(a, bias) => {
                    if self.needs(*bias) {
                        let gb = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                        accumulate(&mut grads, *bias, gb);
                    }
                    if self.needs(*a) {
                        accumulate(&mut grads, *a, g.clone());
                    }
                }
                Op::Relu(x) => {
                    let mut gx = g.clone();
                    gx.zip_mut_with(self.value(*x), |gv, &xv| {
                        if xv <= 0.0 {
                            *gv = 0.0;
                        }
                    });
                    accumulate(&mut grads, *x, gx);
                }
                Op::Sigmoid(x) => {
                    let mut gx = g.clone();
                    gx.zip_mut_with(&node.value, |gv, &s| *gv *= s * (1.0 - s));
                    accumulate(&mut grads, *x, gx);
                }
                Op::Dropout(x, mask) => {
                    accumulate(&mut grads, *x, &g * mask);
                }
                Op::Sum(x) => {
                    let gx = Array2::from_elem(self.shape(*x), g[[0, 0]]);
                    accumulate(&mut grads, *x, gx);
                }
                Op::SoftmaxCrossEntropy {
                    logits,
                    probs,
                    targets,
                } => {
                    let scale = g[[0, 0]] / targets.len() as f64;
                    let mut gz = Array2::zeros(self.shape(*logits));
                    for &(r, class) in targets {
                        let mut row = gz.row_mut(r);
                        row.scaled_add(scale, &probs.row(r));
                        row[class] -= scale;
                    }
                    accumulate(&mut grads, *logits, gz);
                }
            }
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }
}

fn accumulate(grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
    match &mut grads[v.0] {
        Some(existing) => *existing += &g,
        slot @ None => *slot = Some(g),
    }
}

fn one_hot_class(labels: &Matrix, r: usize) -> Result<usize, AutodiffError> {
    let mut class = None;
    for (c, &v) in labels.row(r).iter().enumerate() {
        if v == 1.0 && class.is_none() {
            class = Some(c);
        } else if v != 0.0 {
            return Err(AutodiffError::NotOneHot(r));
        }
    }
    class.ok_or(AutodiffError::NotOneHot(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;
    use ndarray::array;

    #[test]
    fn matmul_identity_and_sum_gradient() {
        let mut t = Tape::new();
        let i = t.constant(Array2::eye(3));
        let w = t.param(array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        let y = t.matmul(i, w).unwrap();
        assert_eq!(t.value(y), t.value(w));
        let s = t.sum(y);
        let g = t.backward(s).unwrap();
        assert_eq!(g.get(w).unwrap(), &Array2::<f64>::ones((3, 2)));
        assert!(g.get(i).is_none());
    }

    #[test]
    fn add_zero_passes_gradient_through() {
        let mut t = Tape::new();
        let a = t.param(array![[1.0, -2.0]]);
        let z = t.constant(Array2::zeros((1, 2)));
        let y = t.add(a, z).unwrap();
        assert_eq!(t.value(y), t.value(a));
        let s = t.sum(y);
        assert_eq!(t.backward(s).unwrap().get(a).unwrap(), &array![[1.0, 1.0]]);
    }

    #[test]
    fn relu_and_sigmoid_values() {
        let mut t = Tape::new();
        let x = t.constant(array![[-1.0, 0.0, 2.0]]);
        let r = t.relu(x);
        assert_eq!(t.value(r), &array![[0.0, 0.0, 2.0]]);
        let z = t.constant(array![[0.0]]);
        let s = t.sigmoid(z);
        assert_eq!(t.scalar(s), 0.5);
    }

    #[test]
    fn relu_subgradient_at_zero_is_zero() {
        let mut t = Tape::new();
        let x = t.param(array![[0.0, 1.0]]);
        let r = t.relu(x);
        let s = t.sum(r);
        assert_eq!(t.backward(s).unwrap().get(x).unwrap(), &array![[0.0, 1.0]]);
    }

    #[test]
    fn diamond_sums_both_paths() {
        let mut t = Tape::new();
        let x = t.param(array![[2.0]]);
        let y = t.add(x, x).unwrap();
        let s = t.sum(y);
        assert_eq!(t.backward(s).unwrap().get(x).unwrap(), &array![[2.0]]);
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut t = Tape::new();
        let x = t.param(Array2::zeros((2, 2)));
        assert_eq!(
            t.backward(x).unwrap_err(),
            AutodiffError::NonScalarLoss((2, 2))
        );
    }

    #[test]
    fn shape_errors() {
        let mut t = Tape::new();
        let a = t.param(Array2::zeros((2, 3)));
        let b = t.param(Array2::zeros((2, 3)));
        assert!(t.matmul(a, b).is_err());
        let bias = t.param(Array2::zeros((1, 2)));
        assert!(t.add_bias_row(a, bias).is_err());
        let c = t.param(Array2::zeros((3, 2)));
        assert!(t.add(a, c).is_err());
        let m = SparseMatrix::identity(4);
        let mut t2 = Tape::new();
        let x = t2.param(Array2::zeros((3, 1)));
        assert!(t2.spmm(&m, x).is_err());
    }

    #[test]
    fn uniform_logits_give_log_c() {
        let mut t = Tape::new();
        let z = t.param(Array2::zeros((3, 5)));
        let labels = array![
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0]
        ];
        let l = t.softmax_cross_entropy(z, &labels, &[0, 1, 2]).unwrap();
        assert!((t.scalar(l) - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn saturated_logits_give_zero_loss() {
        let mut t = Tape::new();
        let z = t.param(array![[30.0, 0.0, 0.0]]);
        let labels = array![[1.0, 0.0, 0.0]];
        let l = t.softmax_cross_entropy(z, &labels, &[0]).unwrap();
        assert!(t.scalar(l) < 1e-9);
    }

    #[test]
    fn cross_entropy_validation() {
        let mut t = Tape::new();
        let z = t.param(Array2::zeros((2, 2)));
        let labels = array![[1.0, 0.0], [0.5, 0.5]];
        assert_eq!(
            t.softmax_cross_entropy(z, &labels, &[]).unwrap_err(),
            AutodiffError::EmptyMask
        );
        assert_eq!(
            t.softmax_cross_entropy(z, &labels, &[1]).unwrap_err(),
            AutodiffError::NotOneHot(1)
        );
        assert_eq!(
            t.softmax_cross_entropy(z, &labels, &[5]).unwrap_err(),
            AutodiffError::MaskRow(5)
        );
        // Unmasked rows are not inspected.
        assert!(t.softmax_cross_entropy(z, &labels, &[0]).is_ok());
    }

    #[test]
    fn cross_entropy_gradient_is_zero_off_mask() {
        let mut t = Tape::new();
        let z = t.param(array![[1.0, 2.0], [3.0, -1.0]]);
        let labels = array![[1.0, 0.0], [0.0, 1.0]];
        let l = t.softmax_cross_entropy(z, &labels, &[1]).unwrap();
        let g = t.backward(l).unwrap();
        let gz = g.get(z).unwrap();
        assert_eq!(gz.row(0).to_vec(), vec![0.0, 0.0]);
        assert!((gz.row(1).sum()).abs() < 1e-15);
    }

    #[test]
    fn dropout_identity_cases() {
        let mut rng = rng_for(0, "test");
        let mut t = Tape::new();
        let x = t.param(Array2::ones((4, 4)));
        assert_eq!(t.dropout(x, 0.0, &mut rng, true).unwrap(), x);
        assert_eq!(t.dropout(x, 0.9, &mut rng, false).unwrap(), x);
        assert_eq!(
            t.dropout(x, 1.0, &mut rng, true).unwrap_err(),
            AutodiffError::DropoutRate(1.0)
        );
        assert!(t.dropout(x, -0.1, &mut rng, true).is_err());
    }

    #[test]
    fn dropout_preserves_mean() {
        let mut rng = rng_for(42, "dropout-mean");
        let mut t = Tape::new();
        let x = t.constant(Array2::ones((100, 1000)));
        let y = t.dropout(x, 0.5, &mut rng, true).unwrap();
        let mean = t.value(y).mean().unwrap();
        assert!((mean - 1.0).abs() <= 0.02, "mean {mean}");
        assert!(t.value(y).iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn dropout_gradient_uses_the_mask() {
        let mut rng = rng_for(3, "dropout-grad");
        let mut t = Tape::new();
        let x = t.param(Array2::ones((5, 5)));
        let y = t.dropout(x, 0.3, &mut rng, true).unwrap();
        let s = t.sum(y);
        let g = t.backward(s).unwrap();
        assert_eq!(g.get(x).unwrap(), t.value(y));
    }
}
