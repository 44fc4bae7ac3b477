//! Tables derived from stored experiment records.
//!
//! Every output is a pure function of the record set: runs are pooled per
//! (encoding, entanglement, width, depth) cell, duplicate seeds are resolved
//! by a fixed ordering, and all tables are sorted.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{mean_std, read_records, ExperimentRecord, SeedRun, SUMMARY_FILE};
use crate::ansatz::Entanglement;
use crate::encoding::Encoding;
use crate::error::{LabError, Result};
use crate::head::NUM_CLASSES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId {
    pub encoding: Encoding,
    pub entanglement: Entanglement,
    pub width: usize,
    pub depth: usize,
}

impl CellId {
    /// Circuit angles plus dense weights and biases.
    pub fn parameters(&self) -> usize {
        self.width * self.depth + NUM_CLASSES * self.width + NUM_CLASSES
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: CellId,
    pub runs: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Mean over runs of the best-validation-loss epoch.
    pub convergence_epoch: f64,
}

/// Pools the runs of all records by cell, one run per seed.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<CellSummary> {
    let mut pooled: BTreeMap<CellId, BTreeMap<u64, (&str, &SeedRun)>> = BTreeMap::new();
    for rec in records {
        let c = &rec.config;
        let id = CellId { encoding: c.encoding, entanglement: c.entanglement, width: c.width, depth: c.depth };
        let seeds = pooled.entry(id).or_default();
        for run in &rec.runs {
            let candidate = (rec.key.as_str(), run);
            seeds
                .entry(run.seed)
                .and_modify(|cur| {
                    let cur_rank = (cur.0, cur.1.test_accuracy.to_bits());
                    let new_rank = (candidate.0, candidate.1.test_accuracy.to_bits());
                    if new_rank < cur_rank {
                        *cur = candidate;
                    }
                })
                .or_insert(candidate);
        }
    }
    pooled
        .into_iter()
        .filter(|(_, runs)| !runs.is_empty())
        .map(|(cell, runs)| {
            let runs: Vec<&SeedRun> = runs.values().map(|(_, r)| *r).collect();
            let n = runs.len() as f64;
            let accs: Vec<f64> = runs.iter().map(|r| r.test_accuracy).collect();
            let (mean_accuracy, std_accuracy) = mean_std(&accs);
            let avg = |f: &dyn Fn(&SeedRun) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
            CellSummary {
                cell,
                runs: runs.len(),
                mean_accuracy,
                std_accuracy,
                macro_precision: avg(&|r| r.metrics.macro_precision),
                macro_recall: avg(&|r| r.metrics.macro_recall),
                macro_f1: avg(&|r| r.metrics.macro_f1),
                convergence_epoch: avg(&|r| r.best_epoch as f64),
            }
        })
        .collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| LabError::io(format!("creating {}", dir.display()), e))?;
    }
    fs::write(path, text).map_err(|e| LabError::io(format!("writing {}", path.display()), e))
}

pub fn summary_csv(cells: &[CellSummary]) -> String {
    let mut out = String::from(
        "encoding,entanglement,width,depth,runs,mean_accuracy,std_accuracy,macro_precision,macro_recall,macro_f1\n",
    );
    for s in cells {
        let c = s.cell;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            c.encoding, c.entanglement, c.width, c.depth, s.runs, s.mean_accuracy, s.std_accuracy,
            s.macro_precision, s.macro_recall, s.macro_f1
        );
    }
    out
}

pub fn write_summary_csv(path: &Path, cells: &[CellSummary]) -> Result<()> {
    write_file(path, &summary_csv(cells))
}

/// Accuracy as a function of width, one series per (encoding, ansatz, depth).
pub fn accuracy_vs_width_csv(cells: &[CellSummary]) -> String {
    let mut rows: Vec<&CellSummary> = cells.iter().collect();
    rows.sort_by_key(|s| (s.cell.encoding, s.cell.entanglement, s.cell.depth, s.cell.width));
    let mut out = String::from("encoding,entanglement,depth,width,runs,mean_accuracy,std_accuracy\n");
    for s in rows {
        let c = s.cell;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6}",
            c.encoding, c.entanglement, c.depth, c.width, s.runs, s.mean_accuracy, s.std_accuracy
        );
    }
    out
}

/// Accuracy as a function of depth, one series per (encoding, ansatz, width).
pub fn accuracy_vs_depth_csv(cells: &[CellSummary]) -> String {
    let mut out = String::from("encoding,entanglement,width,depth,runs,mean_accuracy,std_accuracy\n");
    for s in cells {
        let c = s.cell;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6}",
            c.encoding, c.entanglement, c.width, c.depth, s.runs, s.mean_accuracy, s.std_accuracy
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementDelta {
    pub encoding: Encoding,
    pub width: usize,
    pub depth: usize,
    pub ring_accuracy: f64,
    pub unentangled_accuracy: f64,
}

impl EntanglementDelta {
    /// Positive when the entangled ansatz is more accurate.
    pub fn delta(&self) -> f64 {
        self.ring_accuracy - self.unentangled_accuracy
    }
}

/// Entangled vs unentangled mean accuracy for every (encoding, n, m) with both.
pub fn entanglement_deltas(cells: &[CellSummary]) -> Vec<EntanglementDelta> {
    // (encoding, n, m) → (ring, unentangled)
    type Pair = (Option<f64>, Option<f64>);
    let mut by_key: BTreeMap<(Encoding, usize, usize), Pair> = BTreeMap::new();
    for s in cells {
        let e = by_key.entry((s.cell.encoding, s.cell.width, s.cell.depth)).or_default();
        match s.cell.entanglement {
            Entanglement::Ring => e.0 = Some(s.mean_accuracy),
            Entanglement::Unentangled => e.1 = Some(s.mean_accuracy),
        }
    }
    by_key
        .into_iter()
        .filter_map(|((encoding, width, depth), pair)| match pair {
            (Some(ring_accuracy), Some(unentangled_accuracy)) => {
                Some(EntanglementDelta { encoding, width, depth, ring_accuracy, unentangled_accuracy })
            }
            _ => None,
        })
        .collect()
}

pub fn entanglement_delta_csv(deltas: &[EntanglementDelta]) -> String {
    let mut out = String::from("encoding,width,depth,ring_accuracy,none_accuracy,delta\n");
    for d in deltas {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:+.6}",
            d.encoding, d.width, d.depth, d.ring_accuracy, d.unentangled_accuracy, d.delta()
        );
    }
    out
}

/// Design dimensions a constraint can pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Dim {
    Encoding,
    Entanglement,
    Width,
    Depth,
}

impl Dim {
    const ALL: [Dim; 4] = [Dim::Encoding, Dim::Entanglement, Dim::Width, Dim::Depth];

    fn name(self) -> &'static str {
        match self {
            Dim::Encoding => "encoding",
            Dim::Entanglement => "entanglement",
            Dim::Width => "width",
            Dim::Depth => "depth",
        }
    }

    fn value(self, c: &CellId) -> String {
        match self {
            Dim::Encoding => c.encoding.to_string(),
            Dim::Entanglement => c.entanglement.to_string(),
            Dim::Width => c.width.to_string(),
            Dim::Depth => c.depth.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    /// Constrained dimensions joined by `+`, or `none`.
    pub scenario: String,
    /// `dim=value` pairs joined by `;`, or `-`.
    pub constraint: String,
    pub best: CellSummary,
}

/// Ranking: higher mean accuracy, then fewer parameters, then earlier
/// convergence, then the cell identity itself.
fn better(a: &CellSummary, b: &CellSummary) -> bool {
    use std::cmp::Ordering::*;
    match a.mean_accuracy.total_cmp(&b.mean_accuracy) {
        Greater => return true,
        Less => return false,
        Equal => {}
    }
    match a.cell.parameters().cmp(&b.cell.parameters()) {
        Less => return true,
        Greater => return false,
        Equal => {}
    }
    match a.convergence_epoch.total_cmp(&b.convergence_epoch) {
        Less => return true,
        Greater => return false,
        Equal => {}
    }
    a.cell < b.cell
}

/// Best cell for no constraint, for every single pinned dimension value and
/// for every pinned pair of dimension values.
pub fn recommendations(cells: &[CellSummary]) -> Vec<Recommendation> {
    let mut subsets: Vec<Vec<Dim>> = vec![vec![]];
    for (i, &a) in Dim::ALL.iter().enumerate() {
        subsets.push(vec![a]);
        for &b in &Dim::ALL[i + 1..] {
            subsets.push(vec![a, b]);
        }
    }
    let mut out = Vec::new();
    for dims in subsets {
        let mut best: BTreeMap<Vec<String>, &CellSummary> = BTreeMap::new();
        for s in cells {
            let key: Vec<String> = dims.iter().map(|d| d.value(&s.cell)).collect();
            best.entry(key)
                .and_modify(|cur| {
                    if better(s, cur) {
                        *cur = s;
                    }
                })
                .or_insert(s);
        }
        let scenario = if dims.is_empty() {
            "none".to_string()
        } else {
            dims.iter().map(|d| d.name()).collect::<Vec<_>>().join("+")
        };
        for (values, s) in best {
            let constraint = if dims.is_empty() {
                "-".to_string()
            } else {
                dims.iter().zip(&values).map(|(d, v)| format!("{}={v}", d.name())).collect::<Vec<_>>().join(";")
            };
            out.push(Recommendation { scenario: scenario.clone(), constraint, best: s.clone() });
        }
    }
    out
}

pub fn recommendations_csv(recs: &[Recommendation]) -> String {
    let mut out = String::from(
        "scenario,constraint,encoding,entanglement,width,depth,mean_accuracy,parameters,convergence_epoch\n",
    );
    for r in recs {
        let c = r.best.cell;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{},{:.2}",
            r.scenario, r.constraint, c.encoding, c.entanglement, c.width, c.depth, r.best.mean_accuracy,
            c.parameters(), r.best.convergence_epoch
        );
    }
    out
}

pub const WIDTH_TABLE: &str = "accuracy_vs_width.csv";
pub const DEPTH_TABLE: &str = "accuracy_vs_depth.csv";
pub const DELTA_TABLE: &str = "entanglement_delta.csv";
pub const RECOMMENDATION_TABLE: &str = "recommendations.csv";

/// Writes every table for the records stored in `dir`; returns the paths.
pub fn report(dir: &Path) -> Result<Vec<PathBuf>> {
    let records = read_records(dir)?;
    if records.is_empty() {
        return Err(LabError::Record(format!("no experiment records in {}", dir.display())));
    }
    let cells = summarize(&records);
    let outputs = [
        (SUMMARY_FILE, summary_csv(&cells)),
        (WIDTH_TABLE, accuracy_vs_width_csv(&cells)),
        (DEPTH_TABLE, accuracy_vs_depth_csv(&cells)),
        (DELTA_TABLE, entanglement_delta_csv(&entanglement_deltas(&cells))),
        (RECOMMENDATION_TABLE, recommendations_csv(&recommendations(&cells))),
    ];
    let mut paths = Vec::new();
    for (name, text) in outputs {
        let p = dir.join(name);
        write_file(&p, &text)?;
        paths.push(p);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(encoding: Encoding, entanglement: Entanglement, width: usize, depth: usize, acc: f64, conv: f64) -> CellSummary {
        CellSummary {
            cell: CellId { encoding, entanglement, width, depth },
            runs: 1,
            mean_accuracy: acc,
            std_accuracy: 0.0,
            macro_precision: acc,
            macro_recall: acc,
            macro_f1: acc,
            convergence_epoch: conv,
        }
    }

    #[test]
    fn delta_table() {
        let cells = vec![
            cell(Encoding::Amplitude, Entanglement::Ring, 8, 4, 0.7, 3.0),
            cell(Encoding::Amplitude, Entanglement::Unentangled, 8, 4, 0.6, 3.0),
            cell(Encoding::Angle, Entanglement::Ring, 8, 4, 0.5, 3.0),
        ];
        let d = entanglement_deltas(&cells);
        assert_eq!(d.len(), 1);
        assert!((d[0].delta() - 0.1).abs() < 1e-12);
        assert!(entanglement_delta_csv(&d).contains("amplitude,8,4,0.700000,0.600000,+0.100000"));
    }

    #[test]
    fn ties_prefer_fewer_parameters_then_faster_convergence() {
        let a = cell(Encoding::Angle, Entanglement::Ring, 8, 4, 0.8, 9.0);
        let b = cell(Encoding::Angle, Entanglement::Ring, 8, 2, 0.8, 9.0);
        let c = cell(Encoding::Angle, Entanglement::Unentangled, 8, 2, 0.8, 5.0);
        let recs = recommendations(&[a.clone(), b.clone(), c.clone()]);
        let none = recs.iter().find(|r| r.scenario == "none").unwrap();
        assert_eq!(none.best, c);
        let reversed = recommendations(&[c, b, a]);
        assert_eq!(recs, reversed);
    }

    #[test]
    fn scenario_rows() {
        let cells = vec![
            cell(Encoding::Amplitude, Entanglement::Ring, 6, 2, 0.7, 3.0),
            cell(Encoding::Angle, Entanglement::Unentangled, 8, 2, 0.6, 3.0),
        ];
        let recs = recommendations(&cells);
        // none + per-value singles + per-value pairs
        let singles = recs.iter().filter(|r| !r.scenario.contains('+') && r.scenario != "none").count();
        assert_eq!(singles, 2 + 2 + 2 + 1);
        let enc = recs.iter().find(|r| r.constraint == "encoding=angle").unwrap();
        assert_eq!(enc.best.cell.width, 8);
        let csv = recommendations_csv(&recs);
        assert!(csv.starts_with("scenario,constraint,"));
        assert!(csv.contains("none,-,amplitude,ring,6,2,0.700000,"));
    }

    #[test]
    fn empty_dir_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(report(dir.path()).unwrap_err().is_io());
    }
}
