//! Principal component analysis via a cyclic Jacobi eigensolver on the
//! sample covariance.

#![allow(clippy::needless_range_loop)]

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix: eigenvalues sorted descending,
/// eigenvectors as rows.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-12 relative to the matrix norm.
pub fn symmetric_eigen<T: Real>(matrix: &[Vec<T>]) -> Result<SymmetricEigen<T>> {
    let d = matrix.len();
    if matrix.iter().any(|r| r.len() != d) {
        return Err(LabError::DimensionMismatch("eigensolver needs a square matrix".into()));
    }
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    // v holds eigenvectors as columns.
    let mut v: Vec<Vec<T>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();

    let frob = a.iter().flatten().map(|&x| x * x).sum::<T>().sqrt();
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(10.0)) * frob.max(T::min_positive_value());
    let off_norm = |a: &[Vec<T>]| {
        let mut s = T::zero();
        for p in 0..d {
            for q in (p + 1)..d {
                s += a[p][q] * a[p][q];
            }
        }
        (s + s).sqrt()
    };

    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p][q];
                if apq == T::zero() {
                    continue;
                }
                let two = T::lit(2.0);
                let tau = (a[q][q] - a[p][p]) / (two * apq);
                let t = tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<T> = v.iter().map(|row| row[col]).collect();
            fix_sign(&mut vec);
            vec
        })
        .collect();
    Ok(SymmetricEigen { values, vectors })
}

/// Flips `v` so that its largest-magnitude entry is positive.
fn fix_sign<T: Real>(v: &mut [T]) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < T::zero()) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fitted projection onto the top-k principal axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel<T> {
    pub mean: Vec<T>,
    /// k orthonormal rows, descending variance.
    pub components: Vec<Vec<T>>,
    pub explained_variances: Vec<T>,
    /// Trace of the covariance: the variance over all axes.
    pub total_variance: T,
}

impl<T: Real> PcaModel<T> {
    /// Centers by the column mean, diagonalizes the (rows − 1)-normalized
    /// covariance and keeps the `k` leading eigenvectors.
    pub fn fit<R: AsRef<[T]>>(rows: &[R], k: usize) -> Result<Self> {
        let first = rows.first().ok_or_else(|| LabError::Empty("PCA training rows".into()))?;
        let dim = first.as_ref().len();
        if k == 0 || k > dim {
            return Err(LabError::InvalidArgument(format!("cannot keep {k} components of {dim} features")));
        }
        if rows.len() < k.max(2) {
            return Err(LabError::InvalidArgument(format!("{} rows are too few for {k} components", rows.len())));
        }
        if rows.iter().any(|r| r.as_ref().len() != dim) {
            return Err(LabError::DimensionMismatch("ragged PCA input".into()));
        }
        let m = T::from_usize(rows.len()).unwrap();
        let mut mean = vec![T::zero(); dim];
        for r in rows {
            for (mu, &x) in mean.iter_mut().zip(r.as_ref()) {
                *mu += x;
            }
        }
        mean.iter_mut().for_each(|mu| *mu /= m);

        let mut cov = vec![vec![T::zero(); dim]; dim];
        let mut centered = vec![T::zero(); dim];
        for r in rows {
            for ((c, &x), &mu) in centered.iter_mut().zip(r.as_ref()).zip(&mean) {
                *c = x - mu;
            }
            for i in 0..dim {
                let ci = centered[i];
                if ci == T::zero() {
                    continue;
                }
                for j in i..dim {
                    cov[i][j] += ci * centered[j];
                }
            }
        }
        let denom = m - T::one();
        for i in 0..dim {
            for j in i..dim {
                let v = cov[i][j] / denom;
                cov[i][j] = v;
                cov[j][i] = v;
            }
        }
        let total_variance = (0..dim).map(|i| cov[i][i]).sum();
        let eig = symmetric_eigen(&cov)?;
        Ok(Self {
            mean,
            components: eig.vectors.into_iter().take(k).collect(),
            explained_variances: eig.values.into_iter().take(k).map(|v| v.max(T::zero())).collect(),
            total_variance,
        })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// components · (x − mean)
    pub fn transform(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.mean.len() {
            return Err(LabError::DimensionMismatch(format!(
                "PCA fitted on {} features, got {}",
                self.mean.len(),
                x.len()
            )));
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(x).zip(&self.mean).map(|((&w, &xi), &mu)| w * (xi - mu)).sum())
            .collect())
    }

    /// mean + componentsᵀ · y
    pub fn inverse_transform(&self, y: &[T]) -> Result<Vec<T>> {
        if y.len() != self.k() {
            return Err(LabError::DimensionMismatch(format!("{} scores for {} components", y.len(), self.k())));
        }
        let mut out = self.mean.clone();
        for (c, &yi) in self.components.iter().zip(y) {
            for (o, &w) in out.iter_mut().zip(c) {
                *o += w * yi;
            }
        }
        Ok(out)
    }

    /// Fraction of the total variance the kept components carry.
    pub fn explained_ratio(&self) -> T {
        if self.total_variance <= T::zero() {
            return T::one();
        }
        self.explained_variances.iter().copied().sum::<T>() / self.total_variance
    }
}
