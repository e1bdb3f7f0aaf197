//! Planted-partition citation graphs.
//!
//! Nodes get a uniformly random class. Edges appear independently with
//! probability `p_in` inside a class and `p_out` across classes. Each node
//! draws `words_per_node` binary bag-of-words features; with probability
//! `signal` a word comes from its class's block of the vocabulary, otherwise
//! from the whole vocabulary.

use rand::Rng as _;

use super::{Dataset, DatasetError};
use crate::graph::build_graph;
use crate::seed::rng_for;
use crate::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub nodes: usize,
    pub classes: usize,
    pub features: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub words_per_node: usize,
    pub signal: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            nodes: 600,
            classes: 4,
            features: 200,
            p_in: 0.02,
            p_out: 0.002,
            words_per_node: 12,
            signal: 0.35,
        }
    }
}

pub fn planted_partition(cfg: &SyntheticConfig, seed: u64) -> Result<Dataset, DatasetError> {
    let SyntheticConfig {
        nodes: n,
        classes: c,
        features: d,
        p_in,
        p_out,
        words_per_node,
        signal,
    } = *cfg;
    if n == 0 || c == 0 || d < c {
        return Err(DatasetError::Invalid(format!(
            "need nodes > 0 and features >= classes > 0, got {n}, {d}, {c}"
        )));
    }
    for p in [p_in, p_out, signal] {
        if !(0.0..=1.0).contains(&p) {
            return Err(DatasetError::Invalid(format!("probability {p} outside [0, 1]")));
        }
    }
    let mut rng = rng_for(seed, "synthetic/classes");
    let classes: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();

    let mut rng = rng_for(seed, "synthetic/edges");
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if classes[i] == classes[j] { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }

    let block = d / c;
    let mut rng = rng_for(seed, "synthetic/features");
    let mut x = Matrix::zeros((n, d));
    for i in 0..n {
        for _ in 0..words_per_node {
            let word = if rng.gen::<f64>() < signal {
                classes[i] * block + rng.gen_range(0..block)
            } else {
                rng.gen_range(0..d)
            };
            x[[i, word]] = 1.0;
        }
    }

    let graph = build_graph(n, edges)?;
    let names = (0..c).map(|k| format!("class{k}")).collect();
    let ids = (0..n).map(|i| i.to_string()).collect();
    Dataset::new("synthetic", graph, x, &classes, names, ids)
}
