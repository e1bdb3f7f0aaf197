//! Spectral graph convolution layers, the vanilla GCN stack and the graph
//! residual network built on top of it.
//!
//! A model of depth `K` has `K - 1` hidden layers and one output layer. Every
//! layer computes `Â · drop(H) · W`, adds an optional bias and a residual
//! term `R`, and applies its activation:
//!
//! | kind          | residual `R`        | hidden layer          |
//! |---------------|---------------------|-----------------------|
//! | `none`        | none                | `relu(z)`             |
//! | `naive`       | `H(k-1)`            | `relu(z + R)`         |
//! | `graph-naive` | `Â H(k-1)`          | `relu(z + R)`         |
//! | `raw`         | `X`                 | `relu(z + R)`         |
//! | `graph-raw`   | `Â X`               | `relu(z + R)`         |
//! | `lazy-naive`  | `H(k-1)`            | `sigmoid(z) + R`      |
//!
//! The output layer returns the logits `z + R`; the softmax is fused into the
//! loss. When the residual source is narrower or wider than the layer output,
//! it is multiplied by an adjustment matrix `W^adj`, one per distinct
//! `(source width, target width)` pair, shared across layers.

mod layers;
mod network;
mod train;

pub use layers::{residual_term, sgc_layer, Activation};
pub use network::{ForwardPass, Mode, Model, ParamRole};
pub use train::{evaluate, train, BestValidation, EpochRecord, ProbeSample, TrainReport, Trained};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{AutodiffError, GradNormProbe};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("residual needs an adjustment matrix from width {src} to {tgt}")]
    MissingAdjust { src: usize, tgt: usize },
    #[error("residual of width {residual} cannot be added to a layer of width {layer}")]
    WidthMismatch { residual: usize, layer: usize },
    #[error("the {0} split is empty")]
    EmptySplit(&'static str),
    #[error("node {0} appears in more than one split")]
    OverlappingSplits(usize),
    #[error("features have {features} rows but the operator has {operator}")]
    NodeCount { features: usize, operator: usize },
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss {
        epoch: usize,
        last_probe: Option<Box<GradNormProbe>>,
    },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Residual term added at every layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualKind {
    None,
    Naive,
    GraphNaive,
    Raw,
    GraphRaw,
    LazyNaive,
}

impl ResidualKind {
    pub const ALL: [ResidualKind; 6] = [
        ResidualKind::None,
        ResidualKind::Naive,
        ResidualKind::GraphNaive,
        ResidualKind::Raw,
        ResidualKind::GraphRaw,
        ResidualKind::LazyNaive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResidualKind::None => "none",
            ResidualKind::Naive => "naive",
            ResidualKind::GraphNaive => "graph-naive",
            ResidualKind::Raw => "raw",
            ResidualKind::GraphRaw => "graph-raw",
            ResidualKind::LazyNaive => "lazy-naive",
        }
    }

    /// Residual built from the raw features rather than the previous layer.
    pub fn uses_raw_features(self) -> bool {
        matches!(self, ResidualKind::Raw | ResidualKind::GraphRaw)
    }

    /// Residual propagated through `Â` before being added.
    pub fn is_graph(self) -> bool {
        matches!(self, ResidualKind::GraphNaive | ResidualKind::GraphRaw)
    }
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResidualKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ResidualKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ResidualKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown residual {s:?}, expected one of {}", names.join(", "))
            })
    }
}

/// Architecture and training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Hidden plus output layers.
    pub layers: usize,
    pub hidden: usize,
    pub residual: ResidualKind,
    pub bias: bool,
    pub dropout: f64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Apply weight decay to every weight matrix instead of the first layer only.
    pub decay_all_layers: bool,
    pub epochs: usize,
    pub seed: u64,
    /// Epochs without a validation-loss improvement before stopping; 0 disables.
    pub patience: usize,
    /// Also drop out the residual branch.
    pub dropout_residual: bool,
    /// Record a gradient-norm probe every this many epochs; 0 disables.
    pub probe_every: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            hidden: 16,
            residual: ResidualKind::None,
            bias: false,
            dropout: 0.5,
            learning_rate: 0.01,
            weight_decay: 5e-4,
            decay_all_layers: false,
            epochs: 200,
            seed: 0,
            patience: 0,
            dropout_residual: false,
            probe_every: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::Config(msg));
        if self.layers == 0 {
            return bad("depth must be at least 1".into());
        }
        if self.hidden == 0 {
            return bad("hidden width must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight decay must be nonnegative, got {}", self.weight_decay));
        }
        Ok(())
    }

    /// Layer widths `[d_x, hidden, …, hidden, classes]`, `layers + 1` entries.
    pub fn widths(&self, input: usize, classes: usize) -> Vec<usize> {
        let mut w = vec![input];
        w.extend(std::iter::repeat_n(self.hidden, self.layers - 1));
        w.push(classes);
        w
    }
}
