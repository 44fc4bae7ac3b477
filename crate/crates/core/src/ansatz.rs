//! Periodic Ry ansatz families.
//!
//! Each of the `depth` layers rotates every qubit with its own `Ry(θ)`. The
//! entangled family follows each rotation layer with a nearest-neighbour CNOT
//! ring: CNOT(i → i+1 mod n) for ascending i, so the last qubit closes the
//! ring onto qubit 0. Two qubits have a single neighbour pair, so their ring
//! is the one gate CNOT(0 → 1).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::simulator::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    Ring,
    #[serde(rename = "none")]
    Unentangled,
}

impl Entanglement {
    pub fn as_str(self) -> &'static str {
        match self {
            Entanglement::Ring => "ring",
            Entanglement::Unentangled => "none",
        }
    }
}

impl std::str::FromStr for Entanglement {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ring" | "entangled" => Ok(Entanglement::Ring),
            "none" | "unentangled" => Ok(Entanglement::Unentangled),
            other => Err(LabError::Config(format!("unknown entanglement `{other}`"))),
        }
    }
}

impl std::fmt::Display for Entanglement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Circuit topology: width, number of layer repetitions, entangler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub width: usize,
    pub depth: usize,
    pub entanglement: Entanglement,
}

/// One primitive of the expanded circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// Ry on `qubit` driven by parameter `param`.
    Ry { qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
}

impl AnsatzSpec {
    pub fn new(width: usize, depth: usize, entanglement: Entanglement) -> Result<Self> {
        let spec = Self { width, depth, entanglement };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.width > crate::simulator::MAX_QUBITS {
            return Err(LabError::InvalidWidth(self.width));
        }
        if self.depth == 0 {
            return Err(LabError::InvalidArgument("ansatz depth must be at least 1".into()));
        }
        if self.entanglement == Entanglement::Ring && self.width < 2 {
            return Err(LabError::InvalidArgument("ring entanglement needs at least 2 qubits".into()));
        }
        Ok(())
    }

    /// n·m: one angle per qubit per layer.
    pub fn parameter_count(&self) -> usize {
        self.width * self.depth
    }

    /// Flat index of the angle driving `qubit` in `layer`.
    pub fn param_index(&self, layer: usize, qubit: usize) -> usize {
        layer * self.width + qubit
    }

    /// The circuit in application order.
    pub fn gates(&self) -> Vec<Gate> {
        let n = self.width;
        let ring = self.entanglement == Entanglement::Ring;
        let per_layer = if ring { 2 * n } else { n };
        let mut gates = Vec::with_capacity(per_layer * self.depth);
        for layer in 0..self.depth {
            for qubit in 0..n {
                gates.push(Gate::Ry { qubit, param: self.param_index(layer, qubit) });
            }
            if ring {
                let edges = if n == 2 { 1 } else { n };
                for i in 0..edges {
                    gates.push(Gate::Cnot { control: i, target: (i + 1) % n });
                }
            }
        }
        gates
    }

    /// Uniform angles on [0, 2π) from a seeded ChaCha stream.
    pub fn init_parameters<T: Real>(&self, seed: u64) -> ParameterVector<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ParameterVector::from_vec(
            (0..self.parameter_count())
                .map(|_| T::lit(rng.gen::<f64>() * std::f64::consts::TAU))
                .collect(),
        )
    }
}

/// Trainable rotation angles, flat index `layer * width + qubit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector<T>(Vec<T>);

impl<T: Real> ParameterVector<T> {
    pub fn from_vec(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![T::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }
}

impl<T> std::ops::Index<usize> for ParameterVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

pub(crate) fn apply_gate<T: Real>(state: &mut StateVector<T>, gate: Gate, theta: &[T]) -> Result<()> {
    match gate {
        Gate::Ry { qubit, param } => state.apply_ry(qubit, theta[param]),
        Gate::Cnot { control, target } => state.apply_cnot(control, target),
    }
}

pub(crate) fn check_dims<T: Real>(
    state: &StateVector<T>,
    spec: &AnsatzSpec,
    theta: &ParameterVector<T>,
) -> Result<()> {
    spec.validate()?;
    if state.num_qubits() != spec.width {
        return Err(LabError::DimensionMismatch(format!(
            "{}-qubit state for a width-{} ansatz",
            state.num_qubits(),
            spec.width
        )));
    }
    if theta.len() != spec.parameter_count() {
        return Err(LabError::DimensionMismatch(format!(
            "{} angles for an ansatz with {} parameters",
            theta.len(),
            spec.parameter_count()
        )));
    }
    Ok(())
}

/// Evolves `state` through the ansatz in place.
pub fn apply_ansatz<T: Real>(
    state: &mut StateVector<T>,
    spec: &AnsatzSpec,
    theta: &ParameterVector<T>,
) -> Result<()> {
    check_dims(state, spec, theta)?;
    for gate in spec.gates() {
        apply_gate(state, gate, theta.as_slice())?;
    }
    Ok(())
}
