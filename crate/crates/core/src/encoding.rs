//! Classical-to-quantum feature maps.
//!
//! Amplitude encoding writes a zero-padded, L2-normalized feature vector
//! straight into the register amplitudes. Angle encoding rotates qubit `i`
//! by `Ry(x_i)`, so a feature value `t` yields cos(t/2)|0⟩ + sin(t/2)|1⟩; the
//! [`AngleScaler`] maps raw features onto [0, π] first.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Real;
use crate::simulator::StateVector;

/// How a feature vector becomes an input state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Amplitude,
    Angle,
}

impl Encoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::Amplitude => "amplitude",
            Encoding::Angle => "angle",
        }
    }

    /// Prepares the `n`-qubit input state for one (already preprocessed) sample.
    pub fn prepare<T: Real>(self, x: &[T], n: usize) -> Result<StateVector<T>> {
        match self {
            Encoding::Amplitude => amplitude_encode(x, n),
            Encoding::Angle => angle_encode(x, StateVector::zero(n)?),
        }
    }
}

impl std::str::FromStr for Encoding {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "amplitude" | "amp" => Ok(Encoding::Amplitude),
            "angle" | "ang" => Ok(Encoding::Angle),
            other => Err(LabError::Config(format!("unknown encoding `{other}`"))),
        }
    }
}

impl std::fmt::Display for Encoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_features<T: Real>(x: &[T]) -> Result<()> {
    if x.is_empty() {
        return Err(LabError::Empty("feature vector".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LabError::InvalidArgument("non-finite feature value".into()));
    }
    Ok(())
}

/// Zero-pads `x` to 2^n entries and normalizes it onto the register.
pub fn amplitude_encode<T: Real>(x: &[T], n: usize) -> Result<StateVector<T>> {
    check_features(x)?;
    if n == 0 || n > crate::simulator::MAX_QUBITS {
        return Err(LabError::InvalidWidth(n));
    }
    let capacity = 1usize << n;
    if x.len() > capacity {
        return Err(LabError::Capacity { features: x.len(), num_qubits: n, capacity });
    }
    let norm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm <= T::zero() {
        return Err(LabError::ZeroNorm);
    }
    let mut amps = vec![T::zero(); capacity];
    for (a, &v) in amps.iter_mut().zip(x) {
        *a = v / norm;
    }
    StateVector::from_real(n, &amps)
}

/// Applies `Ry(x_i)` to qubit `i` of `state`.
pub fn angle_encode<T: Real>(x: &[T], mut state: StateVector<T>) -> Result<StateVector<T>> {
    check_features(x)?;
    if x.len() != state.num_qubits() {
        return Err(LabError::DimensionMismatch(format!(
            "{} angles for a {}-qubit register",
            x.len(),
            state.num_qubits()
        )));
    }
    for (q, &angle) in x.iter().enumerate() {
        state.apply_ry(q, angle)?;
    }
    Ok(state)
}

/// Per-feature min-max map onto [0, π], fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleScaler<T> {
    min: Vec<T>,
    max: Vec<T>,
}

impl<T: Real> AngleScaler<T> {
    pub fn fit<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| LabError::Empty("scaler training rows".into()))?;
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(LabError::Empty("scaler feature columns".into()));
        }
        let mut min = first.as_ref().to_vec();
        let mut max = min.clone();
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(LabError::DimensionMismatch(format!(
                    "scaler row of width {} (expected {dim})",
                    row.len()
                )));
            }
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> &[T] {
        &self.min
    }

    pub fn max(&self) -> &[T] {
        &self.max
    }

    /// Maps `x` to angles in [0, π]. Values outside the fitted range clamp;
    /// constant columns map to π/2.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.min.len() {
            return Err(LabError::DimensionMismatch(format!(
                "scaler fitted on {} features, got {}",
                self.min.len(),
                x.len()
            )));
        }
        let pi = T::PI();
        Ok(x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                if hi > lo {
                    (pi * (v - lo) / (hi - lo)).max(T::zero()).min(pi)
                } else {
                    pi / T::lit(2.0)
                }
            })
            .collect())
    }
}
