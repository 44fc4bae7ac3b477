//! Experiment orchestration: configuration, single runs, resumable sweeps
//! and derived reports.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{ConfigFile, ExperimentConfig, GridSpec};
pub use experiment::{
    append_line, load_dataset, prepare_split, read_records, run_experiment, run_experiment_on, run_sweep, ExperimentRecord,
    SeedRun, SweepOutcome,
};
pub use report::{report, summarize, CellSummary};
