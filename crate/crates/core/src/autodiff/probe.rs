//! Layer-to-layer gradient norm measurements.

use serde::{Deserialize, Serialize};

use super::{AutodiffError, Gradients, Var};

/// Ratios are only reported when the downstream norm exceeds this.
pub const RATIO_FLOOR: f64 = 1e-30;

/// `‖∂ℓ/∂x(k)‖₂` for each probed layer output and the adjacent ratios
/// `r_k = ‖∂ℓ/∂x(k-1)‖₂ / ‖∂ℓ/∂x(k)‖₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradNormProbe {
    pub norms: Vec<f64>,
    /// `ratios[k-1]` relates layer `k-1` to layer `k`; `None` when the
    /// downstream norm is below [`RATIO_FLOOR`].
    pub ratios: Vec<Option<f64>>,
    /// `max_k |r_k - 1|` over the defined ratios.
    pub delta_hat: Option<f64>,
}

/// Reads the gradients of `layers` (ordered from input side to output side)
/// after a backward pass.
pub fn grad_norm_probe(grads: &Gradients, layers: &[Var]) -> Result<GradNormProbe, AutodiffError> {
    let norms = layers
        .iter()
        .map(|&v| {
            grads
                .get(v)
                .map(|g| g.iter().map(|x| x * x).sum::<f64>().sqrt())
                .ok_or(AutodiffError::MissingGradient(v.index()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ratios: Vec<Option<f64>> = norms
        .windows(2)
        .map(|w| (w[1] > RATIO_FLOOR).then(|| w[0] / w[1]))
        .collect();
    let delta_hat = ratios
        .iter()
        .flatten()
        .map(|r| (r - 1.0).abs())
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
    Ok(GradNormProbe {
        norms,
        ratios,
        delta_hat,
    })
}
