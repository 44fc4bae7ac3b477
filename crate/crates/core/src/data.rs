//! Digit records: CSV ingestion, seeded train/test split and mini-batching.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{LabError, Result};
use crate::head::NUM_CLASSES;
use crate::scalar::Real;

/// Pixels per 8×8 image.
pub const DIGIT_FEATURES: usize = 64;

/// Feature rows with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub features: Vec<Vec<T>>,
    pub labels: Vec<usize>,
}

impl<T: Real> Dataset<T> {
    pub fn new(features: Vec<Vec<T>>, labels: Vec<usize>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(LabError::DimensionMismatch(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= NUM_CLASSES) {
            return Err(LabError::LabelOutOfRange(bad));
        }
        if let Some(first) = features.first() {
            if features.iter().any(|r| r.len() != first.len()) {
                return Err(LabError::DimensionMismatch("ragged feature rows".into()));
            }
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Keeps the first `m` rows.
    pub fn truncate(&mut self, m: usize) {
        self.features.truncate(m);
        self.labels.truncate(m);
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Applies `f` to every feature row.
    pub fn map_features<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[T]) -> Result<Vec<T>>,
    {
        let features = self.features.iter().map(|r| f(r)).collect::<Result<_>>()?;
        Ok(Self { features, labels: self.labels.clone() })
    }
}

/// Reads `64 features, label` rows. A single leading header line is skipped
/// when its first cell is not numeric. LF and CRLF both work.
pub fn load_csv<T: Real>(path: &Path) -> Result<Dataset<T>> {
    let text = fs::read_to_string(path)
        .map_err(|e| LabError::io(format!("reading {}", path.display()), e))?;
    parse_csv(&text, path)
}

pub(crate) fn parse_csv<T: Real>(text: &str, path: &Path) -> Result<Dataset<T>> {
    let csv_err = |row: usize, message: String| LabError::Csv { path: path.to_path_buf(), row, message };
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let row = idx + 1;
        let line = raw.trim_end_matches('\r').trim_start_matches('\u{feff}');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if idx == 0 && cells[0].parse::<f64>().is_err() {
            continue;
        }
        if cells.len() != DIGIT_FEATURES + 1 {
            return Err(csv_err(
                row,
                format!("expected {} columns, found {}", DIGIT_FEATURES + 1, cells.len()),
            ));
        }
        let mut values = Vec::with_capacity(DIGIT_FEATURES);
        for (col, cell) in cells[..DIGIT_FEATURES].iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| csv_err(row, format!("column {}: `{cell}` is not a number", col + 1)))?;
            if !v.is_finite() {
                return Err(csv_err(row, format!("column {}: non-finite value", col + 1)));
            }
            values.push(T::lit(v));
        }
        let label_cell = cells[DIGIT_FEATURES];
        let label: usize = label_cell
            .parse()
            .map_err(|_| csv_err(row, format!("label `{label_cell}` is not an integer")))?;
        if label >= NUM_CLASSES {
            return Err(csv_err(row, format!("label {label} out of range 0..=9")));
        }
        features.push(values);
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(LabError::Csv { path: path.to_path_buf(), row: 0, message: "no data rows".into() });
    }
    Ok(Dataset { features, labels })
}

/// Train/test partition of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset<T> {
    pub train: Dataset<T>,
    pub test: Dataset<T>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.75;

/// Seeded shuffle, then the first ⌊fraction·M⌋ rows train.
pub fn split<T: Real>(ds: &Dataset<T>, train_fraction: f64, seed: u64) -> Result<SplitDataset<T>> {
    let m = ds.len();
    if m < 2 {
        return Err(LabError::InvalidArgument(format!("cannot split {m} rows")));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(LabError::InvalidArgument(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let n_train = (train_fraction * m as f64).floor() as usize;
    if n_train == 0 || n_train == m {
        return Err(LabError::InvalidArgument(format!(
            "fraction {train_fraction} of {m} rows leaves an empty partition"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut crate::rng::stream(seed, 0x5911));
    let (train_idx, test_idx) = order.split_at(n_train);
    Ok(SplitDataset {
        train: ds.select(train_idx),
        test: ds.select(test_idx),
        train_indices: train_idx.to_vec(),
        test_indices: test_idx.to_vec(),
        seed,
    })
}

pub const DEFAULT_BATCH_SIZE: usize = 16;

/// Seeded permutation of `0..len` cut into batches; the last batch may be short.
pub fn batches(len: usize, batch_size: usize, epoch_seed: u64) -> Vec<Vec<usize>> {
    let batch_size = batch_size.max(1);
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut crate::rng::stream(epoch_seed, 0xBA7C));
    order.chunks(batch_size).map(<[usize]>::to_vec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn row(v: f64, label: usize) -> String {
        let mut cells: Vec<String> = (0..64).map(|i| format!("{}", v + i as f64 / 4.0)).collect();
        cells.push(label.to_string());
        cells.join(",")
    }

    #[test]
    fn two_row_fixture_round_trips() {
        let text = format!("{}\r\n{}\n", row(0.0, 3), row(1.5, 9));
        let ds: Dataset<f64> = parse_csv(&text, Path::new("mem.csv")).unwrap();
        assert_eq!(ds.labels, vec![3, 9]);
        assert_eq!(ds.features[0][5], 1.25);
        assert_eq!(ds.features[1][63], 1.5 + 63.0 / 4.0);
    }

    #[test]
    fn header_is_optional() {
        let header: Vec<String> = (0..64).map(|i| format!("p{i}")).chain(["label".into()]).collect();
        let text = format!("{}\n{}\n", header.join(","), row(2.0, 0));
        let ds: Dataset<f64> = parse_csv(&text, Path::new("h.csv")).unwrap();
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn malformed_rows_name_the_row() {
        let short: Vec<String> = (0..64).map(|i| i.to_string()).collect();
        let text = format!("{}\n{}\n", row(0.0, 1), short.join(","));
        match parse_csv::<f64>(&text, Path::new("bad.csv")) {
            Err(LabError::Csv { row, message, .. }) => {
                assert_eq!(row, 2);
                assert!(message.contains("columns"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = row(0.0, 1).replace("0.25", "abc");
        assert!(matches!(parse_csv::<f64>(&text, Path::new("x")), Err(LabError::Csv { row: 1, .. })));
        let text = row(0.0, 12);
        assert!(matches!(parse_csv::<f64>(&text, Path::new("x")), Err(LabError::Csv { row: 1, .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_csv::<f64>(Path::new("/nonexistent/digits.csv")).unwrap_err();
        assert!(err.is_io());
    }

    #[test]
    fn load_from_disk() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{}", row(1.0, 4)).unwrap();
        let ds: Dataset<f32> = load_csv(f.path()).unwrap();
        assert_eq!(ds.labels, vec![4]);
    }

    fn toy(m: usize) -> Dataset<f64> {
        Dataset::new((0..m).map(|i| vec![i as f64]).collect(), (0..m).map(|i| i % 10).collect()).unwrap()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let s = split(&toy(1797), 0.75, 3).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (1347, 450));
        assert_eq!(s, split(&toy(1797), 0.75, 3).unwrap());
        assert_ne!(s.train_indices, split(&toy(1797), 0.75, 4).unwrap().train_indices);

        let s = split(&toy(4), 0.75, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (3, 1));

        let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(split(&toy(1), 0.75, 1).is_err());
    }

    #[test]
    fn batch_partition() {
        let b = batches(33, 16, 5);
        assert_eq!(b.iter().map(Vec::len).collect::<Vec<_>>(), vec![16, 16, 1]);
        assert_eq!(b, batches(33, 16, 5));
        let mut all: Vec<usize> = b.concat();
        all.sort_unstable();
        assert_eq!(all, (0..33).collect::<Vec<_>>());
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![vec![1.0]], vec![10]).is_err());
        assert!(Dataset::new(vec![vec![1.0]], vec![1, 2]).is_err());
        assert!(Dataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![1, 2]).is_err());
    }
}
