//! Classical read-out: a dense layer from the n expectations to ten class
//! logits, softmax, categorical cross-entropy, and the chain rule back into
//! both the dense layer and the circuit angles.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, ParameterVector};
use crate::encoding::Encoding;
use crate::error::{LabError, Result};
use crate::gradient::{forward, parameter_shift_jacobian};
use crate::scalar::Real;

pub const NUM_CLASSES: usize = 10;

/// Floor applied to the target-class probability before the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// 10 × n weights (row-major, one row per class) and 10 biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams<T> {
    pub inputs: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

impl<T: Real> DenseParams<T> {
    pub fn zeros(inputs: usize) -> Self {
        Self {
            inputs,
            weights: vec![T::zero(); NUM_CLASSES * inputs],
            biases: vec![T::zero(); NUM_CLASSES],
        }
    }

    /// Glorot-uniform weights on ±√(6/(n+10)), zero biases.
    pub fn init(inputs: usize, seed: u64) -> Self {
        let mut rng = crate::rng::stream(seed, 0xD15E);
        let bound = (6.0 / (inputs + NUM_CLASSES) as f64).sqrt();
        let weights = (0..NUM_CLASSES * inputs)
            .map(|_| T::lit(rng.gen_range(-bound..=bound)))
            .collect();
        Self { inputs, weights, biases: vec![T::zero(); NUM_CLASSES] }
    }

    pub fn logits(&self, e: &[T]) -> Result<Vec<T>> {
        if e.len() != self.inputs || self.weights.len() != NUM_CLASSES * self.inputs {
            return Err(LabError::DimensionMismatch(format!(
                "{} expectations for a dense layer with {} inputs",
                e.len(),
                self.inputs
            )));
        }
        Ok(self
            .weights
            .chunks_exact(self.inputs)
            .zip(&self.biases)
            .map(|(row, &b)| row.iter().zip(e).fold(b, |acc, (&w, &x)| acc + w * x))
            .collect())
    }
}

/// Circuit angles together with the dense head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters<T> {
    pub theta: ParameterVector<T>,
    pub dense: DenseParams<T>,
}

impl<T: Real> ModelParameters<T> {
    /// Seeded initial model: uniform angles, Glorot dense weights.
    pub fn init(spec: &AnsatzSpec, seed: u64) -> Self {
        Self {
            theta: spec.init_parameters(crate::rng::derive_seed(seed, 0x7E7A)),
            dense: DenseParams::init(spec.width, seed),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.theta.len() + self.dense.weights.len() + self.dense.biases.len()
    }

    pub(crate) fn slices_mut(&mut self) -> [&mut [T]; 3] {
        [self.theta.as_mut_slice(), &mut self.dense.weights, &mut self.dense.biases]
    }

    pub(crate) fn shape(&self) -> [usize; 3] {
        [self.theta.len(), self.dense.weights.len(), self.dense.biases.len()]
    }
}

/// Gradients shaped like [`ModelParameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradients<T> {
    pub d_theta: Vec<T>,
    pub d_weights: Vec<T>,
    pub d_biases: Vec<T>,
}

impl<T: Real> LossGradients<T> {
    pub fn zeros_like(model: &ModelParameters<T>) -> Self {
        let [a, b, c] = model.shape();
        Self { d_theta: vec![T::zero(); a], d_weights: vec![T::zero(); b], d_biases: vec![T::zero(); c] }
    }

    pub(crate) fn slices(&self) -> [&[T]; 3] {
        [&self.d_theta, &self.d_weights, &self.d_biases]
    }

    pub(crate) fn shape(&self) -> [usize; 3] {
        [self.d_theta.len(), self.d_weights.len(), self.d_biases.len()]
    }

    fn add_assign(&mut self, other: &Self) {
        for (dst, src) in [
            (&mut self.d_theta, &other.d_theta),
            (&mut self.d_weights, &other.d_weights),
            (&mut self.d_biases, &other.d_biases),
        ] {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    fn scale(&mut self, k: T) {
        for v in self.d_theta.iter_mut().chain(&mut self.d_weights).chain(&mut self.d_biases) {
            *v *= k;
        }
    }
}

/// Numerically stable softmax.
pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|v| v / total).collect()
}

/// Class probabilities for one vector of expectations.
pub fn dense_softmax<T: Real>(e: &[T], dense: &DenseParams<T>) -> Result<Vec<T>> {
    Ok(softmax(&dense.logits(e)?))
}

/// −ln(max(p_label, 1e-12)).
pub fn cross_entropy<T: Real>(probs: &[T], label: usize) -> Result<T> {
    if label >= probs.len() {
        return Err(LabError::LabelOutOfRange(label));
    }
    Ok(-probs[label].max(T::lit(PROB_FLOOR)).ln())
}

/// Index of the largest probability; the lowest index wins ties.
pub fn argmax<T: Real>(probs: &[T]) -> usize {
    let mut best = 0;
    for (k, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = k;
        }
    }
    best
}

/// Class probabilities for a raw (preprocessed) sample.
pub fn predict_proba<T: Real>(
    x: &[T],
    model: &ModelParameters<T>,
    spec: &AnsatzSpec,
    encoding: Encoding,
) -> Result<Vec<T>> {
    let prep = encoding.prepare(x, spec.width)?;
    let e = forward(&prep, spec, &model.theta)?;
    dense_softmax(&e, &model.dense)
}

/// Per-sample result of a training step.
#[derive(Debug, Clone)]
pub(crate) struct SampleStep<T> {
    pub loss: T,
    pub predicted: usize,
    pub grads: LossGradients<T>,
}

pub(crate) fn sample_step<T: Real>(
    x: &[T],
    label: usize,
    model: &ModelParameters<T>,
    spec: &AnsatzSpec,
    encoding: Encoding,
) -> Result<SampleStep<T>> {
    if label >= NUM_CLASSES {
        return Err(LabError::LabelOutOfRange(label));
    }
    let prep = encoding.prepare(x, spec.width)?;
    let e = forward(&prep, spec, &model.theta)?;
    let probs = dense_softmax(&e, &model.dense)?;
    let loss = cross_entropy(&probs, label)?;

    let mut delta = probs.clone();
    delta[label] -= T::one();
    let n = model.dense.inputs;
    let mut d_weights = Vec::with_capacity(NUM_CLASSES * n);
    for &dk in &delta {
        d_weights.extend(e.iter().map(|&ei| dk * ei));
    }
    let mut d_expect = vec![T::zero(); n];
    for (row, &dk) in model.dense.weights.chunks_exact(n).zip(&delta) {
        for (d, &w) in d_expect.iter_mut().zip(row) {
            *d += w * dk;
        }
    }
    let d_theta = if d_expect.iter().all(|v| v.is_zero()) {
        vec![T::zero(); model.theta.len()]
    } else {
        parameter_shift_jacobian(&prep, spec, &model.theta)?.vjp(&d_expect)
    };
    Ok(SampleStep {
        loss,
        predicted: argmax(&probs),
        grads: LossGradients { d_theta, d_weights, d_biases: delta },
    })
}

/// Cross-entropy of one sample and its gradient with respect to every
/// trainable parameter.
pub fn loss_and_gradients<T: Real>(
    x: &[T],
    label: usize,
    model: &ModelParameters<T>,
    spec: &AnsatzSpec,
    encoding: Encoding,
) -> Result<(T, LossGradients<T>)> {
    let step = sample_step(x, label, model, spec, encoding)?;
    Ok((step.loss, step.grads))
}

/// Mean loss, mean gradients and correct-prediction count over a batch.
pub(crate) fn batch_step<T: Real, X: AsRef<[T]> + Sync>(
    batch: &[(X, usize)],
    model: &ModelParameters<T>,
    spec: &AnsatzSpec,
    encoding: Encoding,
) -> Result<(T, LossGradients<T>, usize)> {
    if batch.is_empty() {
        return Err(LabError::Empty("batch".into()));
    }
    // Samples fan out; the reduction below runs in batch order, so the sum is
    // the same however the work was scheduled.
    let steps: Vec<SampleStep<T>> = batch
        .par_iter()
        .map(|(x, label)| sample_step(x.as_ref(), *label, model, spec, encoding))
        .collect::<Result<_>>()?;
    let mut grads = LossGradients::zeros_like(model);
    let mut loss = T::zero();
    let mut correct = 0;
    for (step, (_, label)) in steps.iter().zip(batch) {
        grads.add_assign(&step.grads);
        loss += step.loss;
        correct += usize::from(step.predicted == *label);
    }
    let inv = T::one() / T::from_usize(batch.len()).unwrap();
    grads.scale(inv);
    Ok((loss * inv, grads, correct))
}

/// Arithmetic mean of per-sample losses and gradients.
pub fn batch_loss_and_gradients<T: Real, X: AsRef<[T]> + Sync>(
    batch: &[(X, usize)],
    model: &ModelParameters<T>,
    spec: &AnsatzSpec,
    encoding: Encoding,
) -> Result<(T, LossGradients<T>)> {
    batch_step(batch, model, spec, encoding).map(|(l, g, _)| (l, g))
}
