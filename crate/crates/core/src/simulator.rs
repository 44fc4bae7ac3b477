//! Dense statevector simulation restricted to the gate set the models need:
//! `Ry` rotations, `CNOT`, direct amplitude assignment and Pauli-Z readout.
//!
//! Qubit `i` is bit `i` of the basis index, so qubit 0 is the least
//! significant bit: on two qubits the amplitude order is |q1 q0⟩ =
//! |00⟩, |01⟩, |10⟩, |11⟩.

use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Tolerance on Σ|a|² when amplitudes are supplied by the caller.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-9;

pub type ComplexAmp<T> = Complex<T>;

/// 2^n complex amplitudes of an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    num_qubits: usize,
    amplitudes: Vec<ComplexAmp<T>>,
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        Err(LabError::InvalidWidth(n))
    } else {
        Ok(())
    }
}

impl<T: Real> StateVector<T> {
    /// |0…0⟩ on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        check_width(n)?;
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 1 << n];
        amplitudes[0] = Complex::new(T::one(), T::zero());
        Ok(Self { num_qubits: n, amplitudes })
    }

    /// Takes ownership of `amps` as the register state. The squared norm must be
    /// within [`INPUT_NORM_TOLERANCE`] of one; amplitudes are stored unchanged.
    pub fn from_amplitudes(n: usize, amps: Vec<ComplexAmp<T>>) -> Result<Self> {
        check_width(n)?;
        if amps.len() != 1 << n {
            return Err(LabError::DimensionMismatch(format!(
                "{} amplitudes given for a {n}-qubit register (expected {})",
                amps.len(),
                1usize << n
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(LabError::InvalidArgument("non-finite amplitude".into()));
        }
        let norm_sqr: T = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr.as_f64() - 1.0).abs() > INPUT_NORM_TOLERANCE {
            return Err(LabError::NonUnitNorm { norm_sqr: norm_sqr.as_f64() });
        }
        Ok(Self { num_qubits: n, amplitudes: amps })
    }

    /// Convenience for real amplitude vectors.
    pub fn from_real(n: usize, amps: &[T]) -> Result<Self> {
        Self::from_amplitudes(n, amps.iter().map(|&a| Complex::new(a, T::zero())).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[ComplexAmp<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            Err(LabError::QubitOutOfRange { qubit, num_qubits: self.num_qubits })
        } else {
            Ok(())
        }
    }

    /// Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]] on `qubit`.
    pub fn apply_ry(&mut self, qubit: usize, angle: T) -> Result<()> {
        self.check_qubit(qubit)?;
        let half = angle / T::lit(2.0);
        let (s, c) = half.sin_cos();
        let stride = 1usize << qubit;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let x0 = *a0;
                let x1 = *a1;
                *a0 = x0 * c - x1 * s;
                *a1 = x0 * s + x1 * c;
            }
        }
        Ok(())
    }

    /// Flips `target` on every basis state whose `control` bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(LabError::InvalidGate(format!("CNOT control and target both {control}")));
        }
        if control >= self.num_qubits || target >= self.num_qubits {
            return Err(LabError::InvalidGate(format!(
                "CNOT({control}→{target}) out of range for {} qubits",
                self.num_qubits
            )));
        }
        let cbit = 1usize << control;
        let tbit = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amplitudes.swap(i, i | tbit);
            }
        }
        Ok(())
    }

    /// ⟨Z⟩ on one qubit.
    pub fn expectation_z(&self, qubit: usize) -> Result<T> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        let mut acc = T::zero();
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if i & bit == 0 {
                acc += p;
            } else {
                acc -= p;
            }
        }
        Ok(clamp_unit(acc))
    }

    /// ⟨Z_i⟩ for every qubit, in qubit order.
    pub fn expectation_z_all(&self) -> Vec<T> {
        let n = self.num_qubits;
        let mut ones = vec![T::zero(); n];
        let mut total = T::zero();
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            total += p;
            let mut bits = i;
            let mut q = 0;
            while bits != 0 {
                if bits & 1 == 1 {
                    ones[q] += p;
                }
                bits >>= 1;
                q += 1;
            }
        }
        ones.into_iter()
            .map(|p1| clamp_unit(total - p1 - p1))
            .collect()
    }
}

fn clamp_unit<T: Real>(v: T) -> T {
    v.max(-T::one()).min(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn re(s: &StateVector<f64>) -> Vec<f64> {
        s.amplitudes().iter().map(|a| a.re).collect()
    }

    fn basis(n: usize, idx: usize) -> StateVector<f64> {
        let mut v = vec![0.0; 1 << n];
        v[idx] = 1.0;
        StateVector::from_real(n, &v).unwrap()
    }

    #[test]
    fn zero_state_examples() {
        assert_eq!(re(&StateVector::zero(1).unwrap()), vec![1.0, 0.0]);
        assert_eq!(re(&StateVector::zero(2).unwrap()), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(StateVector::<f64>::zero(0), Err(LabError::InvalidWidth(0))));
        assert!(matches!(StateVector::<f64>::zero(25), Err(LabError::InvalidWidth(25))));
    }

    #[test]
    fn ry_examples() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_ry(0, 0.0).unwrap();
        assert_eq!(re(&s), vec![1.0, 0.0]);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_ry(0, PI).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = 1e-15);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_ry(0, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, SQRT_2 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, SQRT_2 / 2.0, epsilon = 1e-15);

        assert!(matches!(s.apply_ry(1, 0.3), Err(LabError::QubitOutOfRange { .. })));
    }

    #[test]
    fn cnot_examples() {
        // |10⟩: qubit 1 set, index 2.
        let mut s = basis(2, 0b10);
        s.apply_cnot(1, 0).unwrap();
        assert_eq!(re(&s), re(&basis(2, 0b11)));

        let mut s = StateVector::<f64>::zero(2).unwrap();
        s.apply_cnot(1, 0).unwrap();
        assert_eq!(re(&s), vec![1.0, 0.0, 0.0, 0.0]);

        let mut s = StateVector::zero(2).unwrap();
        s.apply_ry(0, FRAC_PI_2).unwrap();
        s.apply_cnot(0, 1).unwrap();
        let h = SQRT_2 / 2.0;
        for (a, e) in re(&s).iter().zip([h, 0.0, 0.0, h]) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-15);
        }

        assert!(matches!(s.apply_cnot(0, 0), Err(LabError::InvalidGate(_))));
        assert!(matches!(s.apply_cnot(0, 2), Err(LabError::InvalidGate(_))));
    }

    #[test]
    fn set_amplitudes_examples() {
        let s = StateVector::from_real(1, &[0.0, 1.0]).unwrap();
        assert_eq!(re(&s), vec![0.0, 1.0]);
        let s = StateVector::from_real(2, &[0.5; 4]).unwrap();
        assert_eq!(re(&s), vec![0.5; 4]);
        assert!(matches!(
            StateVector::from_real(1, &[1.0, 1.0]),
            Err(LabError::NonUnitNorm { .. })
        ));
        assert!(matches!(
            StateVector::from_real(2, &[1.0, 0.0]),
            Err(LabError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(StateVector::<f64>::zero(1).unwrap().expectation_z(0).unwrap(), 1.0);
        assert_eq!(basis(1, 1).expectation_z(0).unwrap(), -1.0);
        for theta in [0.0, 0.4, FRAC_PI_2, 2.0, PI] {
            let mut s = StateVector::zero(1).unwrap();
            s.apply_ry(0, theta).unwrap();
            assert_abs_diff_eq!(s.expectation_z(0).unwrap(), theta.cos(), epsilon = 1e-14);
        }
        assert!(StateVector::<f64>::zero(2).unwrap().expectation_z(2).is_err());
    }

    #[test]
    fn expectation_all_examples() {
        assert_eq!(StateVector::<f64>::zero(2).unwrap().expectation_z_all(), vec![1.0, 1.0]);
        assert_eq!(basis(2, 0b01).expectation_z_all(), vec![-1.0, 1.0]);
        let h = SQRT_2 / 2.0;
        let bell = StateVector::from_real(2, &[h, 0.0, 0.0, h]).unwrap();
        for e in bell.expectation_z_all() {
            assert_abs_diff_eq!(e, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let mut s = StateVector::<f32>::zero(2).unwrap();
        s.apply_ry(0, std::f32::consts::FRAC_PI_2).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-6);
        assert!(s.expectation_z(1).unwrap().abs() < 1e-6);
    }
}
