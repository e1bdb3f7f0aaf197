use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layers::{residual_term, sgc_layer, Activation};
use super::{ModelConfig, ModelError, ResidualKind};
use crate::autodiff::{glorot_init, Tape, Var};
use crate::seed::{rng_for, Rng};
use crate::sparse::SparseMatrix;
use crate::Matrix;

/// What a parameter matrix is for. Layers are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamRole {
    Weight { layer: usize },
    Bias { layer: usize },
    Adjust { src: usize, tgt: usize },
}

/// Whether a forward pass applies dropout, and with which stream.
pub enum Mode<'r> {
    Eval,
    Train(&'r mut Rng),
}

/// Nodes recorded by one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub logits: Var,
    /// Output of every layer, input side first; the last one is `logits`.
    pub layers: Vec<Var>,
    /// One leaf per parameter, in [`Model::params`] order.
    pub params: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    widths: Vec<usize>,
    params: Vec<Matrix>,
    roles: Vec<ParamRole>,
}

#[derive(Serialize, Deserialize)]
struct StoredParam {
    role: ParamRole,
    rows: usize,
    cols: usize,
    /// Row-major.
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    config: ModelConfig,
    widths: Vec<usize>,
    params: Vec<StoredParam>,
}

fn layout(config: &ModelConfig, widths: &[usize]) -> Vec<(ParamRole, (usize, usize))> {
    let k = config.layers;
    let mut out: Vec<_> = (1..=k)
        .map(|l| (ParamRole::Weight { layer: l }, (widths[l - 1], widths[l])))
        .collect();
    if config.bias {
        out.extend((1..=k).map(|l| (ParamRole::Bias { layer: l }, (1, widths[l]))));
    }
    if config.residual != ResidualKind::None {
        let keys: BTreeSet<(usize, usize)> = (1..=k)
            .map(|l| {
                let src = if config.residual.uses_raw_features() {
                    widths[0]
                } else {
                    widths[l - 1]
                };
                (src, widths[l])
            })
            .filter(|(s, t)| s != t)
            .collect();
        out.extend(
            keys.into_iter()
                .map(|(src, tgt)| (ParamRole::Adjust { src, tgt }, (src, tgt))),
        );
    }
    out
}

fn drop_input<'a>(
    tape: &mut Tape<'a>,
    v: Var,
    rate: f64,
    mode: &mut Mode<'_>,
) -> Result<Var, ModelError> {
    match mode {
        Mode::Eval => Ok(v),
        Mode::Train(rng) => Ok(tape.dropout(v, rate, rng, true)?),
    }
}

impl Model {
    /// Glorot-initialised weights and adjustment matrices, zero biases. Each
    /// matrix draws from its own seeded stream, so two configurations that
    /// share a layer shape also share its initial values.
    pub fn new(config: &ModelConfig, input: usize, classes: usize) -> Result<Self, ModelError> {
        config.validate()?;
        if input == 0 || classes == 0 {
            return Err(ModelError::Config(format!(
                "input width and class count must be positive, got {input} and {classes}"
            )));
        }
        let widths = config.widths(input, classes);
        let mut params = Vec::new();
        let mut roles = Vec::new();
        for (role, (r, c)) in layout(config, &widths) {
            let value = match role {
                ParamRole::Weight { layer } => {
                    glorot_init(r, c, &mut rng_for(config.seed, &format!("weight/{layer}")))?
                }
                ParamRole::Bias { .. } => Matrix::zeros((r, c)),
                ParamRole::Adjust { src, tgt } => glorot_init(
                    r,
                    c,
                    &mut rng_for(config.seed, &format!("adjust/{src}/{tgt}")),
                )?,
            };
            params.push(value);
            roles.push(role);
        }
        Ok(Self {
            config: config.clone(),
            widths,
            params,
            roles,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn params(&self) -> &[Matrix] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Matrix] {
        &mut self.params
    }

    pub fn roles(&self) -> &[ParamRole] {
        &self.roles
    }

    fn index_of(&self, role: ParamRole) -> Option<usize> {
        self.roles.iter().position(|&r| r == role)
    }

    pub fn param(&self, role: ParamRole) -> Option<&Matrix> {
        self.index_of(role).map(|i| &self.params[i])
    }

    pub fn param_mut(&mut self, role: ParamRole) -> Option<&mut Matrix> {
        self.index_of(role).map(move |i| &mut self.params[i])
    }

    /// Which parameters receive weight decay: the first-layer weights, or
    /// every weight and adjustment matrix with `decay_all_layers`.
    pub fn decay_flags(&self) -> Vec<bool> {
        self.roles
            .iter()
            .map(|role| match role {
                ParamRole::Weight { layer } => *layer == 1 || self.config.decay_all_layers,
                ParamRole::Adjust { .. } => self.config.decay_all_layers,
                ParamRole::Bias { .. } => false,
            })
            .collect()
    }

    /// Records the forward pass on `tape` and returns the logits.
    pub fn forward<'a>(
        &'a self,
        tape: &mut Tape<'a>,
        a_hat: &'a SparseMatrix,
        x: &'a Matrix,
        mut mode: Mode<'_>,
    ) -> Result<ForwardPass, ModelError> {
        let cfg = &self.config;
        if x.nrows() != a_hat.rows() {
            return Err(ModelError::NodeCount {
                features: x.nrows(),
                operator: a_hat.rows(),
            });
        }
        if x.ncols() != self.widths[0] {
            return Err(ModelError::WidthMismatch {
                residual: x.ncols(),
                layer: self.widths[0],
            });
        }
        let vars: Vec<Var> = self.params.iter().map(|p| tape.leaf_ref(p, true)).collect();
        let var = |role| self.index_of(role).map(|i| vars[i]);
        let x_var = tape.leaf_ref(x, false);
        let kind = cfg.residual;

        let mut h = x_var;
        let mut dropped_x = x_var;
        // Raw residuals depend only on the target width, so they are shared.
        let mut raw_cache: HashMap<usize, Var> = HashMap::new();
        let mut layers = Vec::with_capacity(cfg.layers);
        for k in 1..=cfg.layers {
            let input = drop_input(tape, h, cfg.dropout, &mut mode)?;
            if k == 1 {
                dropped_x = input;
            }
            let tgt = self.widths[k];
            let residual = if kind == ResidualKind::None {
                None
            } else if kind.uses_raw_features() {
                match raw_cache.get(&tgt) {
                    Some(&r) => Some(r),
                    None => {
                        let src = if cfg.dropout_residual { dropped_x } else { x_var };
                        let adj = var(ParamRole::Adjust { src: self.widths[0], tgt });
                        let r = residual_term(tape, kind, h, src, a_hat, adj, tgt)?;
                        raw_cache.insert(tgt, r);
                        Some(r)
                    }
                }
            } else {
                let src = if cfg.dropout_residual { input } else { h };
                let adj = var(ParamRole::Adjust { src: self.widths[k - 1], tgt });
                Some(residual_term(tape, kind, src, x_var, a_hat, adj, tgt)?)
            };

            let w = var(ParamRole::Weight { layer: k }).expect("every layer has a weight");
            let bias = var(ParamRole::Bias { layer: k });
            let z = sgc_layer(tape, a_hat, input, w, bias, Activation::Identity)?;
            let last = k == cfg.layers;
            let out = match residual {
                None if last => z,
                None => tape.relu(z),
                Some(r) if last => tape.add(z, r)?,
                Some(r) if kind == ResidualKind::LazyNaive => {
                    let s = tape.sigmoid(z);
                    tape.add(s, r)?
                }
                Some(r) => {
                    let s = tape.add(z, r)?;
                    tape.relu(s)
                }
            };
            layers.push(out);
            h = out;
        }
        Ok(ForwardPass {
            logits: h,
            layers,
            params: vars,
        })
    }

    /// Evaluation-mode logits.
    pub fn predict(&self, a_hat: &SparseMatrix, x: &Matrix) -> Result<Matrix, ModelError> {
        let mut tape = Tape::new();
        let pass = self.forward(&mut tape, a_hat, x, Mode::Eval)?;
        Ok(tape.value(pass.logits).clone())
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let ckpt = Checkpoint {
            config: self.config.clone(),
            widths: self.widths.clone(),
            params: self
                .roles
                .iter()
                .zip(&self.params)
                .map(|(&role, p)| StoredParam {
                    role,
                    rows: p.nrows(),
                    cols: p.ncols(),
                    data: p.iter().copied().collect(),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&ckpt)?)
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let ckpt: Checkpoint = serde_json::from_str(s)?;
        ckpt.config.validate()?;
        let w = &ckpt.widths;
        if w.len() != ckpt.config.layers + 1
            || w[1..w.len() - 1].iter().any(|&h| h != ckpt.config.hidden)
        {
            return Err(ModelError::Checkpoint(format!(
                "widths {w:?} do not fit the configuration"
            )));
        }
        let expected = layout(&ckpt.config, w);
        if expected.len() != ckpt.params.len() {
            return Err(ModelError::Checkpoint(format!(
                "expected {} parameters, found {}",
                expected.len(),
                ckpt.params.len()
            )));
        }
        let mut params = Vec::with_capacity(expected.len());
        let mut roles = Vec::with_capacity(expected.len());
        for ((role, shape), stored) in expected.into_iter().zip(ckpt.params) {
            if stored.role != role || (stored.rows, stored.cols) != shape {
                return Err(ModelError::Checkpoint(format!(
                    "expected {role:?} with shape {shape:?}, found {:?} {}x{}",
                    stored.role, stored.rows, stored.cols
                )));
            }
            let m = Matrix::from_shape_vec(shape, stored.data)
                .map_err(|e| ModelError::Checkpoint(e.to_string()))?;
            params.push(m);
            roles.push(role);
        }
        Ok(Self {
            config: ckpt.config,
            widths: ckpt.widths,
            params,
            roles,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
