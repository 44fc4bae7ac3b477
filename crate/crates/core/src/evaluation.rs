//! Classification metrics and the barren-plateau gradient-variance probe.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, Entanglement};
use crate::error::{LabError, Result};
use crate::gradient::parameter_shift_single;
use crate::head::NUM_CLASSES;
use crate::rng::derive_seed;
use crate::simulator::StateVector;

/// counts[t][p]: samples of true class t predicted as p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum()
    }
}

pub fn confusion(true_labels: &[usize], predicted: &[usize]) -> Result<ConfusionMatrix> {
    if true_labels.len() != predicted.len() {
        return Err(LabError::DimensionMismatch(format!(
            "{} true labels vs {} predictions",
            true_labels.len(),
            predicted.len()
        )));
    }
    if true_labels.is_empty() {
        return Err(LabError::Empty("label sequences".into()));
    }
    let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
    for (&t, &p) in true_labels.iter().zip(predicted) {
        if t >= NUM_CLASSES {
            return Err(LabError::LabelOutOfRange(t));
        }
        if p >= NUM_CLASSES {
            return Err(LabError::LabelOutOfRange(p));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    /// True-class counts.
    pub support: Vec<u64>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision/recall/F1 with 0 for empty denominators; macro
/// averages run over classes that occur among the true labels.
pub fn metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let mut precision = vec![0.0; NUM_CLASSES];
    let mut recall = vec![0.0; NUM_CLASSES];
    let mut f1 = vec![0.0; NUM_CLASSES];
    let mut support = vec![0u64; NUM_CLASSES];
    for c in 0..NUM_CLASSES {
        let tp = cm.counts[c][c];
        let predicted: u64 = (0..NUM_CLASSES).map(|t| cm.counts[t][c]).sum();
        let actual: u64 = cm.counts[c].iter().sum();
        support[c] = actual;
        precision[c] = ratio(tp, predicted);
        recall[c] = ratio(tp, actual);
        let s = precision[c] + recall[c];
        f1[c] = if s > 0.0 { 2.0 * precision[c] * recall[c] / s } else { 0.0 };
    }
    let present: Vec<usize> = (0..NUM_CLASSES).filter(|&c| support[c] > 0).collect();
    let macro_of = |v: &[f64]| {
        if present.is_empty() {
            0.0
        } else {
            present.iter().map(|&c| v[c]).sum::<f64>() / present.len() as f64
        }
    };
    MetricsReport {
        accuracy: ratio(cm.trace(), cm.total()),
        macro_precision: macro_of(&precision),
        macro_recall: macro_of(&recall),
        macro_f1: macro_of(&f1),
        precision,
        recall,
        f1,
        support,
    }
}

/// Gradient variance at one width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRecord {
    pub width: usize,
    pub depth: usize,
    pub entanglement: Entanglement,
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the variance estimate.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceScanResult {
    pub records: Vec<VarianceRecord>,
}

impl VarianceScanResult {
    /// `width,depth,entanglement,samples,variance` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("width,depth,entanglement,samples,variance\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{},{},{}\n", r.width, r.depth, r.entanglement, r.samples, r.variance));
        }
        out
    }
}

/// ∂⟨Z_0⟩/∂θ_(0,0) on |0…0⟩, one sample per seed, angles uniform on [0, 2π).
pub fn gradient_samples(spec: &AnsatzSpec, seeds: &[u64]) -> Result<Vec<f64>> {
    spec.validate()?;
    let prep = StateVector::<f64>::zero(spec.width)?;
    seeds
        .par_iter()
        .map(|&s| {
            let theta = spec.init_parameters(s);
            parameter_shift_single(&prep, spec, &theta, 0, spec.param_index(0, 0))
        })
        .collect()
}

/// (mean, mean(g²) − mean(g)², standard error of that variance).
pub fn sample_variance(g: &[f64]) -> (f64, f64, f64) {
    let s = g.len() as f64;
    let mean = g.iter().sum::<f64>() / s;
    let second = g.iter().map(|x| x * x).sum::<f64>() / s;
    let var = (second - mean * mean).max(0.0);
    let m4 = g.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / s;
    let se = ((m4 - var * var).max(0.0) / s).sqrt();
    (mean, var, se)
}

/// Gradient variance for each width, from `samples` seeded random angle draws.
pub fn bp_variance_scan(
    widths: &[usize],
    depth: usize,
    entanglement: Entanglement,
    samples: usize,
    seed: u64,
) -> Result<VarianceScanResult> {
    if widths.is_empty() {
        return Err(LabError::InvalidArgument("no widths to scan".into()));
    }
    if samples < 2 {
        return Err(LabError::InvalidArgument("variance needs at least 2 samples".into()));
    }
    let mut records = Vec::with_capacity(widths.len());
    for &width in widths {
        let spec = AnsatzSpec::new(width, depth, entanglement)?;
        let base = derive_seed(seed, width as u64);
        let seeds: Vec<u64> = (0..samples as u64).map(|s| derive_seed(base, s)).collect();
        let g = gradient_samples(&spec, &seeds)?;
        let (mean, variance, std_error) = sample_variance(&g);
        records.push(VarianceRecord { width, depth, entanglement, samples, mean, variance, std_error });
    }
    Ok(VarianceScanResult { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn confusion_examples() {
        let cm = confusion(&[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap();
        for t in 0..NUM_CLASSES {
            for p in 0..NUM_CLASSES {
                assert_eq!(cm.counts[t][p], u64::from(t == p && t < 4));
            }
        }
        let cm = confusion(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
        assert_eq!(cm.counts[0][0], 1);
        assert_eq!(cm.counts[0][1], 1);
        assert_eq!(cm.counts[1][1], 2);
        assert_eq!(cm.total(), 4);
        assert!(confusion(&[], &[]).is_err());
        assert!(confusion(&[1], &[1, 2]).is_err());
        assert!(confusion(&[11], &[1]).is_err());
    }

    #[test]
    fn metrics_examples() {
        let r = metrics(&confusion(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap());
        assert_abs_diff_eq!(r.precision[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.recall[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.f1[1], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(r.accuracy, 0.75, epsilon = 1e-15);
        // classes 2..9 never occur and are left out of the macro mean
        assert_abs_diff_eq!(r.macro_recall, (0.5 + 1.0) / 2.0, epsilon = 1e-15);

        let r = metrics(&confusion(&[3, 5, 5, 9], &[3, 5, 5, 9]).unwrap());
        assert_eq!((r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn single_qubit_variance_is_one_half() {
        let res = bp_variance_scan(&[1], 1, Entanglement::Unentangled, 4000, 5).unwrap();
        let v = res.records[0].variance;
        assert!((v - 0.5).abs() <= 0.05, "variance {v}");
    }

    #[test]
    fn identical_draws_have_zero_variance() {
        let spec = AnsatzSpec::new(3, 2, Entanglement::Ring).unwrap();
        let g = gradient_samples(&spec, &[42; 50]).unwrap();
        assert_eq!(sample_variance(&g).1, 0.0);
    }

    #[test]
    fn scan_is_deterministic_and_serializes() {
        let a = bp_variance_scan(&[2, 3], 2, Entanglement::Ring, 20, 9).unwrap();
        let b = bp_variance_scan(&[2, 3], 2, Entanglement::Ring, 20, 9).unwrap();
        assert_eq!(a, b);
        let csv = a.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "width,depth,entanglement,samples,variance");
        assert!(lines[1].starts_with("2,2,ring,20,"));
        assert_eq!(lines.len(), 3);
        assert!(bp_variance_scan(&[2], 2, Entanglement::Ring, 1, 0).is_err());
        assert!(bp_variance_scan(&[], 2, Entanglement::Ring, 10, 0).is_err());
    }
}
