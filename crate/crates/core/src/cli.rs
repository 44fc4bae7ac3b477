//! Command-line front end: `train`, `sweep`, `bp-scan`, `report`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 I/O error.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::ansatz::Entanglement;
use crate::encoding::Encoding;
use crate::error::{LabError, Result};
use crate::evaluation::bp_variance_scan;
use crate::harness::config::{parse_list, ConfigFile, ExperimentConfig, GridSpec, DEFAULT_SEEDS};
use crate::harness::{report, run_experiment, run_sweep};
use crate::training::TrainConfig;

pub const DATA_ENV: &str = "PLATEAU_LAB_DATA";
pub const DEFAULT_DATA: &str = "data/digits.csv";
pub const DEFAULT_OUT: &str = "results";

#[derive(Debug, Parser)]
#[command(name = "plateau-lab", version, about = "Hybrid quantum neural network trainability laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one configuration (all of its seeds) and append its record.
    Train(ExperimentArgs),
    /// Run a width × depth × encoding × entanglement grid, skipping finished cells.
    Sweep {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Cells trained concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Gradient-variance scan over register widths.
    BpScan(BpScanArgs),
    /// Regenerate the comparison tables from stored records.
    Report {
        #[arg(long, default_value = DEFAULT_OUT)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Digits CSV (falls back to $PLATEAU_LAB_DATA, then data/digits.csv).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory for records and tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    encoding: Option<Encoding>,
    #[arg(long)]
    entanglement: Option<Entanglement>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Keep only the first M rows of the data file.
    #[arg(long)]
    subset: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
}

#[derive(Debug, Args)]
struct BpScanArgs {
    /// Comma-separated register widths.
    #[arg(long, default_value = "4,6,8,10")]
    widths: String,
    #[arg(long, default_value_t = 10)]
    depth: usize,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "ring")]
    entanglement: Entanglement,
    /// Also write the CSV to <out>/bp_scan.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        encoding: Encoding::Amplitude,
        entanglement: Entanglement::Ring,
        width: 6,
        depth: 2,
        seeds: DEFAULT_SEEDS.to_vec(),
        train: TrainConfig::default(),
        data: std::env::var_os(DATA_ENV).map_or_else(|| PathBuf::from(DEFAULT_DATA), PathBuf::from),
        out: PathBuf::from(DEFAULT_OUT),
        subset: None,
    }
}

/// Defaults, then the config file, then flags.
fn resolve(args: &ExperimentArgs) -> Result<(ExperimentConfig, GridSpec)> {
    let mut cfg = base_config();
    let mut grid = GridSpec::default();
    if let Some(path) = &args.config {
        let file = ConfigFile::load(path)?;
        file.apply(&mut cfg)?;
        grid = file.grid()?;
    }
    if let Some(v) = &args.data {
        cfg.data = v.clone();
    }
    if let Some(v) = &args.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &args.seeds {
        cfg.seeds = parse_list("seeds", v)?;
    }
    if let Some(v) = args.seed {
        cfg.seeds = vec![v];
    }
    if let Some(v) = args.encoding {
        cfg.encoding = v;
    }
    if let Some(v) = args.entanglement {
        cfg.entanglement = v;
        grid.entanglements = vec![v];
    }
    if let Some(v) = args.width {
        cfg.width = v;
        grid.amplitude_widths.retain(|&w| w == v);
        grid.angle_widths.retain(|&w| w == v);
    }
    if let Some(v) = args.depth {
        cfg.depth = v;
        grid.depths = vec![v];
    }
    if let Some(v) = args.encoding {
        match v {
            Encoding::Amplitude => grid.angle_widths.clear(),
            Encoding::Angle => grid.amplitude_widths.clear(),
        }
    }
    if let Some(v) = args.subset {
        cfg.subset = Some(v);
    }
    if let Some(v) = args.max_epochs {
        cfg.train.max_epochs = v;
    }
    Ok((cfg, grid))
}

fn execute(command: Command) -> Result<()> {
    let stdout = io::stdout();
    match command {
        Command::Train(args) => {
            let (cfg, _) = resolve(&args)?;
            let mut stderr = io::stderr();
            let rec = run_experiment(&cfg, Some(&mut stderr))?;
            let mut out = stdout.lock();
            let _ = writeln!(out, "key\tmean_accuracy\tstd_accuracy\trecords");
            let _ = writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{}",
                rec.key,
                rec.mean_accuracy,
                rec.std_accuracy,
                cfg.out.join(crate::harness::experiment::RECORDS_FILE).display()
            );
        }
        Command::Sweep { args, jobs } => {
            let (cfg, grid) = resolve(&args)?;
            let cells = grid.expand(&cfg);
            let outcome = run_sweep(&cells, jobs)?;
            let mut out = stdout.lock();
            let _ = writeln!(
                out,
                "cells\t{}\texecuted\t{}\tskipped\t{}\tfailed\t{}",
                cells.len(),
                outcome.executed,
                outcome.skipped,
                outcome.failures.len()
            );
            for (key, err) in &outcome.failures {
                let _ = writeln!(io::stderr(), "failed {key}: {err}");
            }
        }
        Command::BpScan(args) => {
            let widths: Vec<usize> = parse_list("widths", &args.widths)?;
            let res = bp_variance_scan(&widths, args.depth, args.entanglement, args.samples, args.seed)?;
            let csv = res.to_csv();
            if let Some(dir) = &args.out {
                std::fs::create_dir_all(dir)
                    .and_then(|()| std::fs::write(dir.join("bp_scan.csv"), &csv))
                    .map_err(|e| LabError::io(format!("writing {}", dir.join("bp_scan.csv").display()), e))?;
            }
            let _ = stdout.lock().write_all(csv.as_bytes());
        }
        Command::Report { out } => {
            for path in report(&out)? {
                let _ = writeln!(stdout.lock(), "{}", path.display());
            }
        }
    }
    Ok(())
}

pub fn exit_code(err: &LabError) -> i32 {
    if err.is_io() {
        2
    } else {
        1
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["plateau-lab", "train", "--bogus"]), 1);
        assert_eq!(run(["plateau-lab", "frobnicate"]), 1);
        assert_eq!(run(["plateau-lab", "--help"]), 0);
    }

    #[test]
    fn capacity_violation_is_config_error() {
        assert_eq!(run(["plateau-lab", "train", "--encoding", "amplitude", "--width", "5"]), 1);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        std::fs::write(&path, "encoding = angle\nwidth = 10\ndepth = 6\n[train]\nmax_epochs = 9\n").unwrap();
        let args = ExperimentArgs {
            data: None,
            out: None,
            config: Some(path),
            seed: Some(5),
            seeds: None,
            encoding: None,
            entanglement: None,
            width: Some(12),
            depth: None,
            subset: None,
            max_epochs: None,
        };
        let (cfg, grid) = resolve(&args).unwrap();
        assert_eq!(cfg.encoding, Encoding::Angle);
        assert_eq!((cfg.width, cfg.depth), (12, 6));
        assert_eq!(cfg.seeds, vec![5]);
        assert_eq!(cfg.train.max_epochs, 9);
        assert_eq!(grid.angle_widths, vec![12]);
    }
}
