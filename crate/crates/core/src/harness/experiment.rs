//! Single experiments and resumable sweeps, persisted as JSON lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{summarize, write_summary_csv};
use crate::data::{load_csv, split, Dataset, SplitDataset, DEFAULT_TRAIN_FRACTION};
use crate::encoding::{AngleScaler, Encoding};
use crate::error::{LabError, Result};
use crate::evaluation::{confusion, metrics, ConfusionMatrix, MetricsReport};
use crate::head::ModelParameters;
use crate::pca::PcaModel;
use crate::rng::derive_seed;
use crate::training::{evaluate, train, History, TrainConfig};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const ERRORS_FILE: &str = "errors.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";

/// How aggregate accuracies are formed; stored in every record.
pub const MEAN_DEFINITION: &str = "mean and sample standard deviation over the seeded runs of a cell; each run's accuracy is measured on its held-out 25% test split at the best-validation-loss epoch";

const SPLIT_STREAM: u64 = 1;
const MODEL_STREAM: u64 = 2;

/// Outcome of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub history: History,
    pub best_epoch: usize,
    pub test_loss: f64,
    pub test_accuracy: f64,
    pub metrics: MetricsReport,
    pub confusion: ConfusionMatrix,
    pub wall_seconds: f64,
    pub epoch_seconds: Vec<f64>,
}

/// One persisted line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub key: String,
    pub config: ExperimentConfig,
    pub runs: Vec<SeedRun>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_definition: String,
    pub wall_seconds: f64,
    pub versions: BTreeMap<String, String>,
}

impl ExperimentRecord {
    /// Copy with every wall-clock field zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.wall_seconds = 0.0;
        for run in &mut r.runs {
            run.wall_seconds = 0.0;
            run.epoch_seconds.clear();
        }
        r
    }
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Split for `seed`, followed by the encoding-specific preprocessing: raw
/// pixels for amplitude encoding; PCA to `width` components fitted on the
/// training rows, then min-max scaling onto [0, π], for angle encoding.
pub fn prepare_split(cfg: &ExperimentConfig, ds: &Dataset<f64>, seed: u64) -> Result<SplitDataset<f64>> {
    let raw = split(ds, DEFAULT_TRAIN_FRACTION, derive_seed(seed, SPLIT_STREAM))?;
    match cfg.encoding {
        Encoding::Amplitude => Ok(raw),
        Encoding::Angle => {
            let pca = PcaModel::fit(&raw.train.features, cfg.width)?;
            let train = raw.train.map_features(|x| pca.transform(x))?;
            let test = raw.test.map_features(|x| pca.transform(x))?;
            let scaler = AngleScaler::fit(&train.features)?;
            Ok(SplitDataset {
                train: train.map_features(|x| scaler.apply(x))?,
                test: test.map_features(|x| scaler.apply(x))?,
                ..raw
            })
        }
    }
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset<f64>> {
    let mut ds = load_csv(&cfg.data)?;
    if let Some(m) = cfg.subset {
        ds.truncate(m);
    }
    Ok(ds)
}

fn run_seed(cfg: &ExperimentConfig, ds: &Dataset<f64>, seed: u64, progress: Option<&mut dyn Write>) -> Result<SeedRun> {
    let started = Instant::now();
    let spec = cfg.spec();
    let data = prepare_split(cfg, ds, seed)?;
    let model = ModelParameters::init(&spec, derive_seed(seed, MODEL_STREAM));
    let train_cfg = TrainConfig { seed, ..cfg.train.clone() };
    let outcome = train(model, &data, &spec, cfg.encoding, &train_cfg, progress)?;
    let test = evaluate(&outcome.model, &data.test, &spec, cfg.encoding)?;
    let cm = confusion(&data.test.labels, &test.predictions)?;
    Ok(SeedRun {
        seed,
        train_rows: data.train.len(),
        test_rows: data.test.len(),
        best_epoch: outcome.best_epoch,
        history: outcome.history,
        test_loss: test.loss,
        test_accuracy: test.accuracy,
        metrics: metrics(&cm),
        confusion: cm,
        wall_seconds: started.elapsed().as_secs_f64(),
        epoch_seconds: outcome.epoch_seconds,
    })
}

/// Runs every seed of `cfg` on an already loaded dataset. Nothing is written.
pub fn run_experiment_on(
    cfg: &ExperimentConfig,
    ds: &Dataset<f64>,
    mut progress: Option<&mut dyn Write>,
) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let mut runs = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        if let Some(out) = progress.as_mut() {
            let _ = writeln!(out, "# {} seed={seed}", cfg.cell_key());
        }
        runs.push(run_seed(cfg, ds, seed, progress.as_mut().map(|w| &mut **w as &mut dyn Write))?);
    }
    let accs: Vec<f64> = runs.iter().map(|r| r.test_accuracy).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&accs);
    let mut versions = BTreeMap::new();
    versions.insert(env!("CARGO_PKG_NAME").to_string(), env!("CARGO_PKG_VERSION").to_string());
    Ok(ExperimentRecord {
        key: cfg.cell_key(),
        config: cfg.clone(),
        runs,
        mean_accuracy,
        std_accuracy,
        mean_definition: MEAN_DEFINITION.to_string(),
        wall_seconds: started.elapsed().as_secs_f64(),
        versions,
    })
}

/// Loads the data, runs all seeds and appends the record to `<out>/records.jsonl`.
pub fn run_experiment(cfg: &ExperimentConfig, progress: Option<&mut dyn Write>) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let ds = load_dataset(cfg)?;
    let record = run_experiment_on(cfg, &ds, progress)?;
    append_line(&cfg.out.join(RECORDS_FILE), &record)?;
    Ok(record)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(format!("creating {}", dir.display()), e))
}

/// Serializes `value` and appends it as a single line with one write.
pub fn append_line<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    let mut line = serde_json::to_string(value).map_err(|e| LabError::Record(e.to_string()))?;
    line.push('\n');
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| LabError::io(format!("opening {}", path.display()), e))?;
    f.write_all(line.as_bytes())
        .and_then(|()| f.flush())
        .map_err(|e| LabError::io(format!("appending to {}", path.display()), e))
}

/// Every record in `<dir>/records.jsonl`; a missing file reads as empty.
pub fn read_records(dir: &Path) -> Result<Vec<ExperimentRecord>> {
    let path = dir.join(RECORDS_FILE);
    let file = match fs::File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(LabError::io(format!("opening {}", path.display()), e)),
    };
    let mut records = Vec::new();
    for (i, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| LabError::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| LabError::Record(format!("{} line {}: {e}", path.display(), i + 1)))?;
        records.push(rec);
    }
    Ok(records)
}

#[derive(Debug, Serialize)]
struct CellError<'a> {
    key: &'a str,
    error: String,
}

/// Result of a sweep: one record per grid cell that completed (old or new).
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<ExperimentRecord>,
    pub executed: usize,
    pub skipped: usize,
    pub failures: Vec<(String, String)>,
}

/// Runs every cell whose record is not yet stored in its output directory.
/// Failed cells are logged to `errors.jsonl` and retried by the next sweep.
/// Cells run concurrently on up to `jobs` threads, and `summary.csv` is
/// rewritten in each output directory afterwards.
pub fn run_sweep(grid: &[ExperimentConfig], jobs: usize) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(LabError::Config("empty sweep grid".into()));
    }
    for cfg in grid {
        cfg.validate()?;
    }
    let out_dirs: BTreeSet<PathBuf> = grid.iter().map(|c| c.out.clone()).collect();
    let mut existing: BTreeMap<(PathBuf, String), ExperimentRecord> = BTreeMap::new();
    for dir in &out_dirs {
        for rec in read_records(dir)? {
            existing.entry((dir.clone(), rec.key.clone())).or_insert(rec);
        }
    }
    let pending: Vec<&ExperimentConfig> = grid
        .iter()
        .filter(|c| !existing.contains_key(&(c.out.clone(), c.cell_key())))
        .collect();
    let skipped = grid.len() - pending.len();

    let mut datasets: BTreeMap<(PathBuf, Option<usize>), Dataset<f64>> = BTreeMap::new();
    for cfg in &pending {
        let k = (cfg.data.clone(), cfg.subset);
        if let std::collections::btree_map::Entry::Vacant(slot) = datasets.entry(k) {
            slot.insert(load_dataset(cfg)?);
        }
    }

    let write_lock = Mutex::new(());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    let results: Vec<(String, Result<ExperimentRecord>)> = pool.install(|| {
        pending
            .par_iter()
            .map(|cfg| {
                let key = cfg.cell_key();
                eprintln!("start  {key}");
                let ds = &datasets[&(cfg.data.clone(), cfg.subset)];
                let mut stderr = io::stderr();
                let res = run_experiment_on(cfg, ds, Some(&mut stderr)).and_then(|rec| {
                    let _guard = write_lock.lock().unwrap_or_else(|p| p.into_inner());
                    append_line(&cfg.out.join(RECORDS_FILE), &rec)?;
                    Ok(rec)
                });
                match &res {
                    Ok(rec) => eprintln!("done   {key} mean_accuracy={:.4}", rec.mean_accuracy),
                    Err(e) => {
                        eprintln!("failed {key}: {e}");
                        let _guard = write_lock.lock().unwrap_or_else(|p| p.into_inner());
                        let _ = append_line(&cfg.out.join(ERRORS_FILE), &CellError { key: &key, error: e.to_string() });
                    }
                }
                (key, res)
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut executed = 0;
    let mut fresh: BTreeMap<(PathBuf, String), ExperimentRecord> = BTreeMap::new();
    for ((key, res), cfg) in results.into_iter().zip(&pending) {
        match res {
            Ok(rec) => {
                executed += 1;
                fresh.insert((cfg.out.clone(), key), rec);
            }
            Err(e) => failures.push((key, e.to_string())),
        }
    }
    let records = grid
        .iter()
        .filter_map(|c| {
            let k = (c.out.clone(), c.cell_key());
            existing.get(&k).or_else(|| fresh.get(&k)).cloned()
        })
        .collect();

    for dir in &out_dirs {
        let all = read_records(dir)?;
        write_summary_csv(&dir.join(SUMMARY_FILE), &summarize(&all))?;
    }
    Ok(SweepOutcome { records, executed, skipped, failures })
}
