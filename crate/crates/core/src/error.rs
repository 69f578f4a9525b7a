use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading and shaping the sensitive input table.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8: {0}")]
    Utf8(#[from] std::str::Utf8Error),
    #[error("input has no header row")]
    MissingHeader,
    #[error("empty column name at header position {0}")]
    EmptyColumnName(usize),
    #[error("duplicate column name in header: {0}")]
    DuplicateColumn(String),
    #[error("ragged row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown column: {0}")]
    UnknownColumn(String),
    #[error("row {row}, column {column}: non-numeric value {value:?} in quantized column")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column}: value {value} lies outside all quantization bins")]
    OutOfBins {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("malformed delimited input: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error)]
pub enum CombinationError {
    #[error(
        "record {record} has {attributes} attributes: {combinations} combinations up to length {max_length} exceed the cap of {cap}"
    )]
    EnumerationCapExceeded {
        record: usize,
        attributes: usize,
        max_length: usize,
        combinations: u128,
        cap: u64,
    },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error(transparent)]
    Combination(#[from] CombinationError),
    #[error("combination {0} occurs in the synthetic data but has no sensitive count (leak)")]
    MissingSensitiveCount(String),
}

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("cannot suppress {needed} occurrences of {attribute}: only {available} synthetic records hold it")]
    InsufficientHolders {
        attribute: String,
        needed: u64,
        available: usize,
    },
}

/// Pipeline failures, tagged with the stage that raised them.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[config] {0}")]
    Config(#[from] ConfigError),
    #[error("[read] cannot read input {path}: {source}")]
    ReadInput {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("[ingest] {0}")]
    Ingest(#[from] IngestError),
    #[error("[aggregates] {0}")]
    Aggregates(#[source] CombinationError),
    #[error("[synthesis] {0}")]
    Synthesis(#[from] SynthesisError),
    #[error("[evaluation] {0}")]
    Evaluation(#[from] EvaluationError),
    #[error("[emit] {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit code: 2 for invalid configuration, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(ConfigError::Invalid { .. })
            | PipelineError::Config(ConfigError::Parse(_)) => 2,
            _ => 1,
        }
    }
}
