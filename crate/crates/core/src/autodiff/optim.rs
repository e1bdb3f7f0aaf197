//! Parameter initialisation and the Adam optimizer.

use ndarray::Array2;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::AutodiffError;
use crate::seed::Rng;
use crate::Matrix;

/// Glorot/Xavier uniform initialisation on `±sqrt(6 / (rows + cols))`.
pub fn glorot_init(rows: usize, cols: usize, rng: &mut Rng) -> Result<Matrix, AutodiffError> {
    if rows == 0 || cols == 0 {
        return Err(AutodiffError::Dimension(rows, cols));
    }
    let range = (6.0 / (rows + cols) as f64).sqrt();
    Ok(Array2::from_shape_simple_fn((rows, cols), || {
        rng.gen_range(-range..=range)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 coefficient; `weight_decay · θ` is added to the loss gradient of
    /// every parameter flagged for decay.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
    decay: Vec<bool>,
    step: u64,
}

impl AdamState {
    /// Fresh state for parameters of the given shapes. `decay[i]` selects the
    /// parameters that receive weight decay.
    pub fn new(config: AdamConfig, shapes: &[(usize, usize)], decay: &[bool]) -> Self {
        assert_eq!(shapes.len(), decay.len(), "one decay flag per parameter");
        Self {
            config,
            first: shapes.iter().map(|&s| Array2::zeros(s)).collect(),
            second: shapes.iter().map(|&s| Array2::zeros(s)).collect(),
            decay: decay.to_vec(),
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(
    params: &mut [Matrix],
    grads: &[Matrix],
    state: &mut AdamState,
) -> Result<(), AutodiffError> {
    if params.len() != state.first.len() || grads.len() != params.len() {
        return Err(AutodiffError::StateMismatch(params.len().min(grads.len())));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.dim() != state.first[i].dim() || g.dim() != p.dim() {
            return Err(AutodiffError::StateMismatch(i));
        }
    }
    state.step += 1;
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
        weight_decay,
    } = state.config;
    let t = state.step as i32;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let decay = if state.decay[i] { weight_decay } else { 0.0 };
        let m = &mut state.first[i];
        let v = &mut state.second[i];
        ndarray::Zip::from(p)
            .and(g)
            .and(m)
            .and(v)
            .for_each(|p, &g, m, v| {
                let g = g + decay * *p;
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            });
    }
    Ok(())
}
