//! Derivatives of the per-qubit expectations ⟨Z_i⟩ with respect to the
//! ansatz angles.
//!
//! Every trainable gate is a Pauli-Y rotation, so the two-term shift rule
//! with s = π/2 is exact. Shifted circuits share the prefix up to the shifted
//! gate; that prefix is evolved once and cloned.

use crate::ansatz::{apply_ansatz, apply_gate, check_dims, AnsatzSpec, Gate, ParameterVector};
use crate::error::Result;
use crate::scalar::Real;
use crate::simulator::StateVector;

/// `rows × cols` matrix with entry (i, j) = ∂⟨Z_i⟩/∂θ_j, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumJacobian<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Real> QuantumJacobian<T> {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![T::zero(); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    /// Jᵀ·v: pulls a cotangent on the expectations back onto θ.
    pub fn vjp(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            for (o, &r) in out.iter_mut().zip(row) {
                *o += vi * r;
            }
        }
        out
    }
}

/// ⟨Z_i⟩ for every qubit after running the ansatz on a copy of `prep`.
pub fn forward<T: Real>(
    prep: &StateVector<T>,
    spec: &AnsatzSpec,
    theta: &ParameterVector<T>,
) -> Result<Vec<T>> {
    let mut state = prep.clone();
    apply_ansatz(&mut state, spec, theta)?;
    Ok(state.expectation_z_all())
}

/// Like [`parameter_shift_jacobian`] but with arbitrary shifts:
/// entry (i, j) = (f_i(θ_j + plus) − f_i(θ_j + minus)) / 2.
pub fn shifted_jacobian<T: Real>(
    prep: &StateVector<T>,
    spec: &AnsatzSpec,
    theta: &ParameterVector<T>,
    plus: T,
    minus: T,
) -> Result<QuantumJacobian<T>> {
    check_dims(prep, spec, theta)?;
    let gates = spec.gates();
    let angles = theta.as_slice();
    let half = T::lit(0.5);
    let mut jac = QuantumJacobian::zeros(spec.width, spec.parameter_count());
    let mut prefix = prep.clone();
    for (k, &gate) in gates.iter().enumerate() {
        if let Gate::Ry { qubit, param } = gate {
            let run = |shift: T| -> Result<Vec<T>> {
                let mut s = prefix.clone();
                s.apply_ry(qubit, angles[param] + shift)?;
                for &g in &gates[k + 1..] {
                    apply_gate(&mut s, g, angles)?;
                }
                Ok(s.expectation_z_all())
            };
            let up = run(plus)?;
            let down = run(minus)?;
            for (i, (u, d)) in up.into_iter().zip(down).enumerate() {
                jac.set(i, param, (u - d) * half);
            }
        }
        apply_gate(&mut prefix, gate, angles)?;
    }
    Ok(jac)
}

/// Exact Jacobian from the ±π/2 shift rule.
pub fn parameter_shift_jacobian<T: Real>(
    prep: &StateVector<T>,
    spec: &AnsatzSpec,
    theta: &ParameterVector<T>,
) -> Result<QuantumJacobian<T>> {
    let s = T::FRAC_PI_2();
    shifted_jacobian(prep, spec, theta, s, -s)
}

/// ∂⟨Z_qubit⟩/∂θ_param alone (two circuit evaluations).
pub fn parameter_shift_single<T: Real>(
    prep: &StateVector<T>,
    spec: &AnsatzSpec,
    theta: &ParameterVector<T>,
    qubit: usize,
    param: usize,
) -> Result<T> {
    check_dims(prep, spec, theta)?;
    if param >= theta.len() {
        return Err(crate::error::LabError::InvalidArgument(format!(
            "parameter index {param} out of range for {} angles",
            theta.len()
        )));
    }
    let mut shifted = theta.clone();
    shifted.as_mut_slice()[param] = theta[param] + T::FRAC_PI_2();
    let mut up = prep.clone();
    apply_ansatz(&mut up, spec, &shifted)?;
    shifted.as_mut_slice()[param] = theta[param] - T::FRAC_PI_2();
    let mut down = prep.clone();
    apply_ansatz(&mut down, spec, &shifted)?;
    Ok((up.expectation_z(qubit)? - down.expectation_z(qubit)?) * T::lit(0.5))
}

/// Central-difference Jacobian, used as an independent check.
pub fn finite_difference_jacobian<T: Real>(
    prep: &StateVector<T>,
    spec: &AnsatzSpec,
    theta: &ParameterVector<T>,
    h: T,
) -> Result<QuantumJacobian<T>> {
    if h <= T::zero() {
        return Err(crate::error::LabError::InvalidArgument("finite-difference step must be positive".into()));
    }
    check_dims(prep, spec, theta)?;
    let mut jac = QuantumJacobian::zeros(spec.width, spec.parameter_count());
    let two_h = h + h;
    for j in 0..theta.len() {
        let mut t = theta.clone();
        t.as_mut_slice()[j] = theta[j] + h;
        let up = forward(prep, spec, &t)?;
        t.as_mut_slice()[j] = theta[j] - h;
        let down = forward(prep, spec, &t)?;
        for (i, (u, d)) in up.into_iter().zip(down).enumerate() {
            jac.set(i, j, (u - d) / two_h);
        }
    }
    Ok(jac)
}
