use std::path::PathBuf;

use thiserror::Error;

/// Every failure the laboratory can report.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid register width {0}: expected 1..={max}", max = crate::simulator::MAX_QUBITS)]
    InvalidWidth(usize),
    #[error("qubit index {qubit} out of range for {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state norm² {norm_sqr} differs from 1 beyond tolerance")]
    NonUnitNorm { norm_sqr: f64 },
    #[error("cannot normalize an all-zero feature vector")]
    ZeroNorm,
    #[error("{features} features exceed the capacity of {num_qubits} qubits (2^n = {capacity})")]
    Capacity { features: usize, num_qubits: usize, capacity: usize },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("label {0} out of range 0..=9")]
    LabelOutOfRange(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: row {row}: {message}")]
    Csv { path: PathBuf, row: usize, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record: {0}")]
    Record(String),
}

impl LabError {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        LabError::Io { context: context.into(), source }
    }

    /// True for failures that originate in the filesystem or in file contents.
    pub fn is_io(&self) -> bool {
        matches!(self, LabError::Io { .. } | LabError::Csv { .. } | LabError::Record(_))
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
