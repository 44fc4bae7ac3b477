//! Hybrid quantum neural network laboratory.
//!
//! A dense statevector simulator drives a periodic `Ry` ansatz (optionally
//! entangled by a nearest-neighbour CNOT ring). Inputs reach the register by
//! amplitude or angle encoding, the per-qubit ⟨Z⟩ readouts feed a ten-way
//! softmax layer, and the whole model trains with parameter-shift gradients
//! and Adam. The harness runs width × depth × encoding × entanglement sweeps
//! and gradient-variance scans and turns stored runs into comparison tables.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the harness uses.

pub mod ansatz;
pub mod cli;
pub mod data;
pub mod encoding;
pub mod error;
pub mod evaluation;
pub mod gradient;
pub mod harness;
pub mod head;
pub mod pca;
pub mod rng;
pub mod scalar;
pub mod simulator;
pub mod training;

pub use ansatz::{apply_ansatz, AnsatzSpec, Entanglement, Gate};
pub use encoding::{amplitude_encode, angle_encode, Encoding};
pub use error::{LabError, Result};
pub use evaluation::{bp_variance_scan, confusion, metrics, ConfusionMatrix, MetricsReport, VarianceScanResult};
pub use gradient::{finite_difference_jacobian, forward, parameter_shift_jacobian};
pub use head::{batch_loss_and_gradients, cross_entropy, dense_softmax, loss_and_gradients};
pub use scalar::Real;
pub use training::{adam_step, evaluate, train, EpochRecord, History, TrainConfig};

pub type ComplexAmp = simulator::ComplexAmp<f64>;
pub type StateVector = simulator::StateVector<f64>;
pub type ParameterVector = ansatz::ParameterVector<f64>;
pub type QuantumJacobian = gradient::QuantumJacobian<f64>;
pub type DenseParams = head::DenseParams<f64>;
pub type ModelParameters = head::ModelParameters<f64>;
pub type LossGradients = head::LossGradients<f64>;
pub type Dataset = data::Dataset<f64>;
pub type SplitDataset = data::SplitDataset<f64>;
pub type PcaModel = pca::PcaModel<f64>;
pub type AngleScaler = encoding::AngleScaler<f64>;
pub type AdamState = training::AdamState<f64>;
