#![allow(dead_code)]

pub mod fd;

use gresnet::graph::{build_graph, is_bipartite, is_connected, Graph};
use gresnet::seed::Rng;
use gresnet::Matrix;
use rand::seq::SliceRandom;
use rand::Rng as _;

/// Random connected graph: a random spanning tree plus extra edges with
/// probability `extra`.
pub fn random_connected(rng: &mut Rng, n: usize, extra: f64) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        edges.push((parent, order[i]));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen::<f64>() < extra {
                edges.push((a, b));
            }
        }
    }
    let g = build_graph(n, edges).unwrap();
    assert!(is_connected(&g));
    g
}

/// Random connected graph with an odd cycle.
pub fn random_connected_non_bipartite(rng: &mut Rng, n: usize) -> Graph {
    assert!(n >= 3);
    loop {
        let extra = rng.gen_range(0.0..0.3);
        let g = random_connected(rng, n, extra);
        if !is_bipartite(&g) {
            return g;
        }
    }
}

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_shape_simple_fn((rows, cols), || rng.gen_range(-1.0..1.0))
}

pub fn one_hot(classes: &[usize], c: usize) -> Matrix {
    Matrix::from_shape_fn((classes.len(), c), |(i, k)| if classes[i] == k { 1.0 } else { 0.0 })
}

/// Random columns on the probability simplex.
pub fn random_column_stochastic(rng: &mut Rng, rows: usize, cols: usize) -> Matrix {
    let mut x = Matrix::from_shape_simple_fn((rows, cols), || rng.gen_range(0.0..1.0));
    for mut c in x.columns_mut() {
        let s = c.sum();
        c.mapv_inplace(|v| v / s);
    }
    x
}

/// `‖a - b‖ / max(‖a‖, ‖b‖)` over all entries, 0 when both vanish.
pub fn relative_error(a: &Matrix, b: &Matrix) -> f64 {
    let norm = |m: &Matrix| m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&(a - b)) / scale
    }
}
