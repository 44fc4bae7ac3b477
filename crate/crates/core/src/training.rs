//! Optimisation loop: Adam, reduce-on-plateau learning rate, early stopping
//! with best-weight restoration.
//!
//! Every epoch draws its batch order from `derive_seed(seed, epoch)`, and the
//! batch reduction is ordered, so a run is a pure function of its inputs.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzSpec;
use crate::data::{batches, Dataset, SplitDataset};
use crate::encoding::Encoding;
use crate::error::{LabError, Result};
use crate::head::{argmax, batch_step, cross_entropy, predict_proba, LossGradients, ModelParameters};
use crate::scalar::Real;

/// Minimum decrease of validation loss that counts as improvement.
pub const IMPROVEMENT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub initial_lr: f64,
    pub lr_factor: f64,
    pub lr_patience: usize,
    pub stop_patience: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 100,
            batch_size: 16,
            initial_lr: 0.01,
            lr_factor: 0.1,
            lr_patience: 3,
            stop_patience: 4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(LabError::Config(what.to_string()));
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return bad("initial_lr must be positive");
        }
        if !(self.lr_factor > 0.0 && self.lr_factor < 1.0) {
            return bad("lr_factor must lie in (0, 1)");
        }
        if self.lr_patience == 0 || self.stop_patience == 0 {
            return bad("patience values must be at least 1");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.adam_eps <= 0.0 {
            return bad("adam_eps must be positive");
        }
        Ok(())
    }
}

/// Adam moment accumulators, flattened over (θ, weights, biases).
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub t: u64,
    shape: [usize; 3],
    beta1: T,
    beta2: T,
    eps: T,
}

impl<T: Real> AdamState<T> {
    pub fn new(model: &ModelParameters<T>, beta1: f64, beta2: f64, eps: f64) -> Self {
        let shape = model.shape();
        let total = shape.iter().sum();
        Self {
            m: vec![T::zero(); total],
            v: vec![T::zero(); total],
            t: 0,
            shape,
            beta1: T::lit(beta1),
            beta2: T::lit(beta2),
            eps: T::lit(eps),
        }
    }

    pub fn from_config(model: &ModelParameters<T>, cfg: &TrainConfig) -> Self {
        Self::new(model, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    }
}

/// One bias-corrected Adam update applied to every parameter.
pub fn adam_step<T: Real>(
    params: &mut ModelParameters<T>,
    grads: &LossGradients<T>,
    state: &mut AdamState<T>,
    lr: T,
) -> Result<()> {
    if params.shape() != state.shape || grads.shape() != state.shape {
        return Err(LabError::DimensionMismatch(format!(
            "Adam state {:?}, parameters {:?}, gradients {:?}",
            state.shape,
            params.shape(),
            grads.shape()
        )));
    }
    state.t += 1;
    let t = i32::try_from(state.t).unwrap_or(i32::MAX);
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = T::one() - b1.powi(t);
    let c2 = T::one() - b2.powi(t);
    let mut k = 0;
    for (p_slice, g_slice) in params.slices_mut().into_iter().zip(grads.slices()) {
        for (p, &g) in p_slice.iter_mut().zip(g_slice) {
            let m = b1 * state.m[k] + (T::one() - b1) * g;
            let v = b2 * state.v[k] + (T::one() - b2) * g * g;
            state.m[k] = m;
            state.v[k] = v;
            let m_hat = m / c1;
            let v_hat = v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + state.eps);
            k += 1;
        }
    }
    Ok(())
}

/// Metrics of one completed epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
    pub lr: f64,
}

/// Per-epoch records of one run. Wall-clock times are kept separately (see
/// [`TrainOutcome::epoch_seconds`]) so that a history is reproducible bit for bit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// Epoch (0-based) with the lowest validation loss; earliest on ties.
    pub fn best_epoch(&self) -> Option<usize> {
        let mut best: Option<&EpochRecord> = None;
        for r in &self.epochs {
            if best.is_none_or(|b| r.val_loss < b.val_loss) {
                best = Some(r);
            }
        }
        best.map(|r| r.epoch)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    /// Parameters from the epoch with the best validation loss.
    pub model: ModelParameters<T>,
    pub history: History,
    pub best_epoch: usize,
    pub epoch_seconds: Vec<f64>,
}

/// Loss, accuracy and per-sample predictions over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
    pub predictions: Vec<usize>,
}

pub fn evaluate<T: Real>(
    model: &ModelParameters<T>,
    ds: &Dataset<T>,
    spec: &AnsatzSpec,
    encoding: Encoding,
) -> Result<Evaluation> {
    if ds.is_empty() {
        return Err(LabError::Empty("evaluation dataset".into()));
    }
    let per_sample: Vec<(f64, usize)> = ds
        .features
        .par_iter()
        .zip(ds.labels.par_iter())
        .map(|(x, &label)| {
            let probs = predict_proba(x, model, spec, encoding)?;
            Ok((cross_entropy(&probs, label)?.as_f64(), argmax(&probs)))
        })
        .collect::<Result<_>>()?;
    let m = ds.len() as f64;
    let loss = per_sample.iter().map(|(l, _)| l).sum::<f64>() / m;
    let predictions: Vec<usize> = per_sample.into_iter().map(|(_, p)| p).collect();
    let correct = predictions.iter().zip(&ds.labels).filter(|(p, l)| p == l).count();
    Ok(Evaluation { loss, accuracy: correct as f64 / m, predictions })
}

/// Trains `model` on `split.train`, monitoring `split.test`.
///
/// When `progress` is given, one tab-separated line per epoch is written:
/// `epoch  train_loss  train_acc  val_loss  val_acc  lr`.
pub fn train<T: Real>(
    model: ModelParameters<T>,
    split: &SplitDataset<T>,
    spec: &AnsatzSpec,
    encoding: Encoding,
    config: &TrainConfig,
    mut progress: Option<&mut dyn Write>,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    spec.validate()?;
    if split.train.is_empty() || split.test.is_empty() {
        return Err(LabError::Empty("training or validation split".into()));
    }
    let mut model = model;
    let mut adam = AdamState::from_config(&model, config);
    let mut lr = config.initial_lr;
    let mut best_loss = f64::INFINITY;
    let mut best_model = model.clone();
    let mut best_epoch = 0;
    let mut plateau_wait = 0;
    let mut stop_wait = 0;
    let mut history = History::default();
    let mut epoch_seconds = Vec::new();

    for epoch in 0..config.max_epochs {
        let started = Instant::now();
        let order = batches(split.train.len(), config.batch_size, crate::rng::derive_seed(config.seed, epoch as u64));
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for idx in &order {
            let batch: Vec<(&[T], usize)> =
                idx.iter().map(|&i| (split.train.features[i].as_slice(), split.train.labels[i])).collect();
            let (loss, grads, hits) = batch_step(&batch, &model, spec, encoding)?;
            loss_sum += loss.as_f64() * idx.len() as f64;
            correct += hits;
            adam_step(&mut model, &grads, &mut adam, T::lit(lr))?;
        }
        let val = evaluate(&model, &split.test, spec, encoding)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / split.train.len() as f64,
            train_accuracy: correct as f64 / split.train.len() as f64,
            val_loss: val.loss,
            val_accuracy: val.accuracy,
            lr,
        };
        if let Some(out) = progress.as_deref_mut() {
            let _ = writeln!(
                out,
                "{}\t{:.6}\t{:.4}\t{:.6}\t{:.4}\t{:e}",
                record.epoch, record.train_loss, record.train_accuracy, record.val_loss, record.val_accuracy, record.lr
            );
        }
        history.epochs.push(record);
        epoch_seconds.push(started.elapsed().as_secs_f64());

        if val.loss < best_loss - IMPROVEMENT_THRESHOLD {
            best_loss = val.loss;
            best_model = model.clone();
            best_epoch = epoch;
            plateau_wait = 0;
            stop_wait = 0;
        } else {
            plateau_wait += 1;
            stop_wait += 1;
            if stop_wait >= config.stop_patience {
                break;
            }
            if plateau_wait >= config.lr_patience {
                lr *= config.lr_factor;
                plateau_wait = 0;
            }
        }
    }
    Ok(TrainOutcome { model: best_model, history, best_epoch, epoch_seconds })
}
