use serde::{Deserialize, Serialize};

use super::network::{Mode, Model};
use super::{ModelConfig, ModelError};
use crate::autodiff::{
    adam_step, grad_norm_probe, AdamConfig, AdamState, AutodiffError, GradNormProbe, Tape,
};
use crate::dataset::Dataset;
use crate::seed::rng_for;
use crate::sparse::SparseMatrix;
use crate::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Training loss of the step taken this epoch (dropout active). Epoch 0
    /// reports the evaluation-mode loss of the initial parameters.
    pub loss: f64,
    pub val_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestValidation {
    pub epoch: usize,
    pub val_acc: f64,
    pub val_loss: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub epoch: usize,
    #[serde(flatten)]
    pub probe: GradNormProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: ModelConfig,
    pub records: Vec<EpochRecord>,
    pub best: BestValidation,
    pub probes: Vec<ProbeSample>,
    /// Epoch at which early stopping fired.
    pub stopped_at: Option<usize>,
}

impl TrainReport {
    pub fn max_train_acc(&self) -> f64 {
        self.records.iter().map(|r| r.train_acc).fold(0.0, f64::max)
    }

    pub fn last(&self) -> &EpochRecord {
        self.records.last().expect("a report always holds epoch 0")
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub report: TrainReport,
}

/// Fraction of `mask` rows whose largest logit sits on the labelled class.
/// Ties go to the lowest class index.
pub fn evaluate(logits: &Matrix, labels: &Matrix, mask: &[usize]) -> Result<f64, ModelError> {
    if mask.is_empty() {
        return Err(AutodiffError::EmptyMask.into());
    }
    if logits.dim() != labels.dim() {
        return Err(AutodiffError::Shape {
            op: "evaluate",
            left: logits.dim(),
            right: labels.dim(),
        }
        .into());
    }
    let mut hits = 0usize;
    for &r in mask {
        if r >= logits.nrows() {
            return Err(AutodiffError::MaskRow(r).into());
        }
        if argmax(logits.row(r)) == argmax(labels.row(r)) {
            hits += 1;
        }
    }
    Ok(hits as f64 / mask.len() as f64)
}

fn argmax(row: ndarray::ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn check_splits(data: &Dataset) -> Result<(), ModelError> {
    let n = data.features.nrows();
    let mut seen = vec![false; n];
    for (name, split) in [("train", &data.train), ("validation", &data.val), ("test", &data.test)] {
        if split.is_empty() {
            return Err(ModelError::EmptySplit(name));
        }
        for &i in split {
            if i >= n {
                return Err(AutodiffError::MaskRow(i).into());
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(ModelError::OverlappingSplits(i));
            }
        }
    }
    Ok(())
}

struct Assessment {
    train_loss: f64,
    val_loss: f64,
    train_acc: f64,
    val_acc: f64,
    test_acc: f64,
}

fn assess(model: &Model, a_hat: &SparseMatrix, data: &Dataset) -> Result<Assessment, ModelError> {
    let mut tape = Tape::new();
    let pass = model.forward(&mut tape, a_hat, &data.features, Mode::Eval)?;
    let train_loss = tape.softmax_cross_entropy(pass.logits, &data.labels, &data.train)?;
    let val_loss = tape.softmax_cross_entropy(pass.logits, &data.labels, &data.val)?;
    let logits = tape.value(pass.logits);
    Ok(Assessment {
        train_loss: tape.scalar(train_loss),
        val_loss: tape.scalar(val_loss),
        train_acc: evaluate(logits, &data.labels, &data.train)?,
        val_acc: evaluate(logits, &data.labels, &data.val)?,
        test_acc: evaluate(logits, &data.labels, &data.test)?,
    })
}

/// Full-batch Adam on the masked cross-entropy of the training nodes.
///
/// Epoch 0 evaluates the initial parameters; epochs `1..=epochs` each take
/// one optimizer step and then evaluate. The best-validation snapshot is the
/// epoch with the highest validation accuracy, ties going to the lower
/// validation loss and then to the earlier epoch.
pub fn train(config: &ModelConfig, data: &Dataset, a_hat: &SparseMatrix) -> Result<Trained, ModelError> {
    config.validate()?;
    check_splits(data)?;
    let x = &data.features;
    if a_hat.rows() != x.nrows() {
        return Err(ModelError::NodeCount {
            features: x.nrows(),
            operator: a_hat.rows(),
        });
    }
    let mut model = Model::new(config, x.ncols(), data.labels.ncols())?;
    let shapes: Vec<_> = model.params().iter().map(Matrix::dim).collect();
    let adam_config = AdamConfig {
        learning_rate: config.learning_rate,
        weight_decay: config.weight_decay,
        ..AdamConfig::default()
    };
    let mut adam = AdamState::new(adam_config, &shapes, &model.decay_flags());

    let init = assess(&model, a_hat, data)?;
    let record = |epoch, loss, a: &Assessment| EpochRecord {
        epoch,
        loss,
        val_loss: a.val_loss,
        train_acc: a.train_acc,
        val_acc: a.val_acc,
        test_acc: a.test_acc,
    };
    let mut records = vec![record(0, init.train_loss, &init)];
    let mut best = BestValidation {
        epoch: 0,
        val_acc: init.val_acc,
        val_loss: init.val_loss,
        test_acc: init.test_acc,
    };
    let mut best_loss = init.val_loss;
    let mut waited = 0;
    let mut probes: Vec<ProbeSample> = Vec::new();
    let mut stopped_at = None;

    for epoch in 1..=config.epochs {
        let mut rng = rng_for(config.seed, &format!("dropout/{epoch}"));
        let (loss, grads) = {
            let mut tape = Tape::new();
            let pass = model.forward(&mut tape, a_hat, x, Mode::Train(&mut rng))?;
            let loss = tape.softmax_cross_entropy(pass.logits, &data.labels, &data.train)?;
            let value = tape.scalar(loss);
            if !value.is_finite() {
                return Err(ModelError::NonFiniteLoss {
                    epoch,
                    last_probe: probes.pop().map(|s| Box::new(s.probe)),
                });
            }
            let mut g = tape.backward(loss)?;
            if config.probe_every > 0 && epoch % config.probe_every == 0 {
                probes.push(ProbeSample {
                    epoch,
                    probe: grad_norm_probe(&g, &pass.layers)?,
                });
            }
            let grads: Vec<Matrix> = pass
                .params
                .iter()
                .zip(&shapes)
                .map(|(&v, &s)| g.take(v).unwrap_or_else(|| Matrix::zeros(s)))
                .collect();
            (value, grads)
        };
        adam_step(model.params_mut(), &grads, &mut adam)?;

        let now = assess(&model, a_hat, data)?;
        if !now.val_loss.is_finite() {
            return Err(ModelError::NonFiniteLoss {
                epoch,
                last_probe: probes.pop().map(|s| Box::new(s.probe)),
            });
        }
        records.push(record(epoch, loss, &now));
        if now.val_acc > best.val_acc || (now.val_acc == best.val_acc && now.val_loss < best.val_loss) {
            best = BestValidation {
                epoch,
                val_acc: now.val_acc,
                val_loss: now.val_loss,
                test_acc: now.test_acc,
            };
        }
        if now.val_loss < best_loss {
            best_loss = now.val_loss;
            waited = 0;
        } else {
            waited += 1;
            if config.patience > 0 && waited >= config.patience {
                stopped_at = Some(epoch);
                break;
            }
        }
    }

    Ok(Trained {
        model,
        report: TrainReport {
            config: config.clone(),
            records,
            best,
            probes,
            stopped_at,
        },
    })
}
