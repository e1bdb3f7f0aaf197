//! Central finite-difference gradient checks shared by the gradient tests
//! and the acceptance report.

use gresnet::autodiff::{Tape, Var};
use gresnet::dataset::Dataset;
use gresnet::graph::normalized_adjacency;
use gresnet::model::{Mode, Model, ModelConfig, ResidualKind};
use gresnet::seed::{rng_for, Rng};
use gresnet::sparse::SparseMatrix;
use gresnet::Matrix;
use rand::Rng as _;

use super::{one_hot, random_connected_non_bipartite, random_matrix, relative_error};

pub const H: f64 = 1e-5;
pub const INSTANCES: u64 = 20;

/// Builds `left · op(inputs) · right` summed to a scalar, so every output
/// entry gets a distinct random weight.
fn scalar_loss<'a>(tape: &mut Tape<'a>, y: Var, left: &Matrix, right: &Matrix) -> Var {
    let l = tape.constant(left.clone());
    let r = tape.constant(right.clone());
    let ly = tape.matmul(l, y).unwrap();
    let lyr = tape.matmul(ly, r).unwrap();
    tape.sum(lyr)
}

/// Largest relative error between the analytic and the central-difference
/// gradient over all `inputs`.
pub fn check<'a, F>(inputs: &[Matrix], rng: &mut Rng, op: F) -> f64
where
    F: Fn(&mut Tape<'a>, &[Var]) -> Var,
{
    let probe_shape = {
        let mut t = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|m| t.param(m.clone())).collect();
        let y = op(&mut t, &vars);
        t.shape(y)
    };
    let left = random_matrix(rng, 1, probe_shape.0);
    let right = random_matrix(rng, probe_shape.1, 1);
    let eval = |values: &[Matrix]| -> (f64, Vec<Matrix>) {
        let mut t = Tape::new();
        let vars: Vec<Var> = values.iter().map(|m| t.param(m.clone())).collect();
        let y = op(&mut t, &vars);
        let loss = if t.shape(y) == (1, 1) && probe_shape == (1, 1) {
            y
        } else {
            scalar_loss(&mut t, y, &left, &right)
        };
        let g = t.backward(loss).unwrap();
        let grads = vars
            .iter()
            .zip(values)
            .map(|(&v, m)| g.get(v).cloned().unwrap_or_else(|| Matrix::zeros(m.dim())))
            .collect();
        (t.scalar(loss), grads)
    };
    let (_, analytic) = eval(inputs);
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.iter().enumerate() {
        let mut numeric = Matrix::zeros(a.dim());
        for idx in 0..a.len() {
            let (r, c) = (idx / a.ncols(), idx % a.ncols());
            let mut plus = inputs.to_vec();
            plus[k][[r, c]] += H;
            let mut minus = inputs.to_vec();
            minus[k][[r, c]] -= H;
            numeric[[r, c]] = (eval(&plus).0 - eval(&minus).0) / (2.0 * H);
        }
        worst = worst.max(relative_error(a, &numeric));
    }
    worst
}

pub fn dims(rng: &mut Rng) -> (usize, usize, usize) {
    (rng.gen_range(1..6), rng.gen_range(1..6), rng.gen_range(1..6))
}

/// Entries pushed away from the relu kink.
pub fn away_from_zero(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_shape_simple_fn((rows, cols), || {
        let v: f64 = rng.gen_range(1e-3..1.0);
        if rng.gen() {
            v
        } else {
            -v
        }
    })
}

/// Differentiable tape operations with their own finite-difference check.
pub const OPS: [&str; 9] = [
    "matmul",
    "spmm",
    "add",
    "add_bias_row",
    "relu",
    "sigmoid",
    "sum",
    "dropout",
    "softmax_cross_entropy",
];

/// Worst relative gradient error of `op` on random instance `s`.
pub fn op_instance(op: &str, s: u64) -> f64 {
    let mut rng = rng_for(s, &format!("fd/{op}"));
    let (m, k, n) = dims(&mut rng);
    match op {
        "matmul" => {
            let inputs = [random_matrix(&mut rng, m, k), random_matrix(&mut rng, k, n)];
            check(&inputs, &mut rng, |t, v| t.matmul(v[0], v[1]).unwrap())
        }
        "spmm" => {
            let nodes = rng.gen_range(3..12);
            let g = random_connected_non_bipartite(&mut rng, nodes);
            let a = normalized_adjacency(&g);
            let inputs = [random_matrix(&mut rng, nodes, k)];
            check(&inputs, &mut rng, |t, v| t.spmm(&a, v[0]).unwrap())
        }
        "add" => {
            let inputs = [random_matrix(&mut rng, m, n), random_matrix(&mut rng, m, n)];
            check(&inputs, &mut rng, |t, v| t.add(v[0], v[1]).unwrap())
        }
        "add_bias_row" => {
            let inputs = [random_matrix(&mut rng, m, n), random_matrix(&mut rng, 1, n)];
            check(&inputs, &mut rng, |t, v| t.add_bias_row(v[0], v[1]).unwrap())
        }
        "relu" => {
            let inputs = [away_from_zero(&mut rng, m, n)];
            check(&inputs, &mut rng, |t, v| t.relu(v[0]))
        }
        "sigmoid" => {
            let inputs = [random_matrix(&mut rng, m, n).mapv(|v| 4.0 * v)];
            check(&inputs, &mut rng, |t, v| t.sigmoid(v[0]))
        }
        "sum" => {
            let inputs = [random_matrix(&mut rng, m, n)];
            check(&inputs, &mut rng, |t, v| {
                let sq = t.sigmoid(v[0]);
                t.sum(sq)
            })
        }
        "dropout" => {
            let inputs = [random_matrix(&mut rng, m, n)];
            check(&inputs, &mut rng, |t, v| {
                let mut mask_rng = rng_for(s, "fd/dropout/mask");
                t.dropout(v[0], 0.4, &mut mask_rng, true).unwrap()
            })
        }
        "softmax_cross_entropy" => {
            let rows = rng.gen_range(2..8);
            let c = rng.gen_range(2..6);
            let classes: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..c)).collect();
            let labels = one_hot(&classes, c);
            let mask: Vec<usize> = (0..rows).filter(|_| rng.gen_bool(0.7)).collect();
            let mask = if mask.is_empty() { vec![0] } else { mask };
            let inputs = [random_matrix(&mut rng, rows, c).mapv(|v| 3.0 * v)];
            check(&inputs, &mut rng, |t, v| {
                t.softmax_cross_entropy(v[0], &labels, &mask).unwrap()
            })
        }
        other => panic!("no finite-difference check for {other}"),
    }
}

/// Loss of `model` with its parameters replaced by `params`.
fn model_loss(
    model: &Model,
    params: &[Matrix],
    a: &SparseMatrix,
    data: &Dataset,
    seed: u64,
) -> (f64, Vec<Matrix>) {
    let mut m = model.clone();
    m.params_mut().clone_from_slice(params);
    let mut rng = rng_for(seed, "fd/model/dropout");
    let mut t = Tape::new();
    let pass = m.forward(&mut t, a, &data.features, Mode::Train(&mut rng)).unwrap();
    let loss = t.softmax_cross_entropy(pass.logits, &data.labels, &data.train).unwrap();
    let g = t.backward(loss).unwrap();
    let grads = pass
        .params
        .iter()
        .zip(params)
        .map(|(&v, p)| g.get(v).cloned().unwrap_or_else(|| Matrix::zeros(p.dim())))
        .collect();
    (t.scalar(loss), grads)
}

pub fn model_instance(s: u64, residual: ResidualKind, layers: usize) -> f64 {
    let mut rng = rng_for(s, "fd/model");
    let n = 6;
    let g = random_connected_non_bipartite(&mut rng, n);
    let a = normalized_adjacency(&g);
    let x = random_matrix(&mut rng, n, 5);
    let classes: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let data = Dataset::new(
        "fd",
        g,
        x,
        &classes,
        vec!["a".into(), "b".into(), "c".into()],
        (0..n).map(|i| i.to_string()).collect(),
    )
    .unwrap()
    .with_splits(vec![0, 1, 2, 3], vec![4], vec![5])
    .unwrap();
    let config = ModelConfig {
        layers,
        hidden: 4,
        residual,
        bias: s % 2 == 1,
        dropout: 0.3,
        seed: s,
        ..Default::default()
    };
    let mut model = Model::new(&config, 5, 3).unwrap();
    // Start biases away from zero so they matter.
    for p in model.params_mut() {
        if p.nrows() == 1 {
            p.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
        }
    }
    let params = model.params().to_vec();
    let (_, analytic) = model_loss(&model, &params, &a, &data, s);
    let mut worst: f64 = 0.0;
    for (k, an) in analytic.iter().enumerate() {
        let mut numeric = Matrix::zeros(an.dim());
        for r in 0..an.nrows() {
            for c in 0..an.ncols() {
                let mut plus = params.clone();
                plus[k][[r, c]] += H;
                let mut minus = params.clone();
                minus[k][[r, c]] -= H;
                numeric[[r, c]] = (model_loss(&model, &plus, &a, &data, s).0
                    - model_loss(&model, &minus, &a, &data, s).0)
                    / (2.0 * H);
            }
        }
        worst = worst.max(relative_error(an, &numeric));
    }
    worst
}

