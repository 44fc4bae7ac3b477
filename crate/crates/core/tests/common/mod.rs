#![allow(dead_code)]

use std::path::PathBuf;

use plateau_lab::{AnsatzSpec, Gate, StateVector};

pub fn digits_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/digits.csv")
}

/// Dense real matrix, row-major.
#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub m: Vec<f64>,
}

impl Dense {
    pub fn identity(dim: usize) -> Self {
        let mut m = vec![0.0; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = 1.0;
        }
        Self { dim, m }
    }

    pub fn from2(a: [[f64; 2]; 2]) -> Self {
        Self { dim: 2, m: vec![a[0][0], a[0][1], a[1][0], a[1][1]] }
    }

    pub fn kron(&self, other: &Dense) -> Dense {
        let d = self.dim * other.dim;
        let mut m = vec![0.0; d * d];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.m[i * self.dim + j];
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        m[(i * other.dim + k) * d + j * other.dim + l] = a * other.m[k * other.dim + l];
                    }
                }
            }
        }
        Dense { dim: d, m }
    }

    pub fn add(&self, other: &Dense) -> Dense {
        Dense { dim: self.dim, m: self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect() }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.m[i * self.dim + j] * v[j]).sum()).collect()
    }
}

pub fn ry(theta: f64) -> Dense {
    let (s, c) = (theta / 2.0).sin_cos();
    Dense::from2([[c, -s], [s, c]])
}

/// ⊗ over qubits n−1 … 0 (qubit 0 is the least significant index bit).
pub fn embed(n: usize, ops: &[(usize, Dense)]) -> Dense {
    let mut out = Dense::identity(1);
    for q in (0..n).rev() {
        let factor = ops.iter().find(|(k, _)| *k == q).map_or_else(|| Dense::identity(2), |(_, d)| d.clone());
        out = out.kron(&factor);
    }
    out
}

pub fn ry_on(n: usize, qubit: usize, theta: f64) -> Dense {
    embed(n, &[(qubit, ry(theta))])
}

/// |0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t
pub fn cnot_on(n: usize, control: usize, target: usize) -> Dense {
    let p0 = Dense::from2([[1.0, 0.0], [0.0, 0.0]]);
    let p1 = Dense::from2([[0.0, 0.0], [0.0, 1.0]]);
    let x = Dense::from2([[0.0, 1.0], [1.0, 0.0]]);
    embed(n, &[(control, p0)]).add(&embed(n, &[(control, p1), (target, x)]))
}

pub fn real_amps(s: &StateVector) -> Vec<f64> {
    s.amplitudes().iter().map(|a| a.re).collect()
}

/// Full ansatz unitary from the dense oracle.
pub fn ansatz_matrix(spec: &AnsatzSpec, theta: &[f64]) -> Dense {
    let n = spec.width;
    let mut u = Dense::identity(1 << n);
    for g in spec.gates() {
        let step = match g {
            Gate::Ry { qubit, param } => ry_on(n, qubit, theta[param]),
            Gate::Cnot { control, target } => cnot_on(n, control, target),
        };
        let mut next = vec![0.0; u.dim * u.dim];
        for i in 0..u.dim {
            for k in 0..u.dim {
                let a = step.m[i * u.dim + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..u.dim {
                    next[i * u.dim + j] += a * u.m[k * u.dim + j];
                }
            }
        }
        u.m = next;
    }
    u
}

/// Compact status line used by the acceptance suite.
pub fn report(id: usize, name: &str, pass: bool, detail: &str) {
    println!("[{}] criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
