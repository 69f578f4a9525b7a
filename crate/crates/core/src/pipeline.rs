//! End-to-end run: ingest, index, aggregate, protect, synthesize, evaluate, emit.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregates::{compute_aggregates, protect};
use crate::bundle::ExplorerBundle;
use crate::combinations::AttributeIndex;
use crate::config::{PipelineConfig, SynthesisMode};
use crate::error::PipelineError;
use crate::evaluation::{evaluate, EvaluationSummary};
use crate::ingest::ingest;
use crate::synthesis::{seeded_rng, synthesize};

pub const SYNTHETIC_FILE: &str = "synthetic_microdata.tsv";
pub const AGGREGATES_FILE: &str = "reportable_aggregates.tsv";
pub const BUNDLE_FILE: &str = "explorer_bundle.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestParameters {
    pub k: u64,
    pub p: u64,
    pub reporting_length: usize,
    pub mode: SynthesisMode,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub records: usize,
    pub columns: usize,
    pub attribute_values: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactManifest {
    /// File names relative to the output directory, in emission order.
    pub files: Vec<ManifestFile>,
    pub parameters: ManifestParameters,
    pub dataset: DatasetStats,
    pub synthetic_records: usize,
    /// Exact ratio as `numerator/denominator`.
    pub synthesis_ratio: String,
    pub synthesis_ratio_value: f64,
    pub released_combinations: usize,
    pub leaked_combinations: u64,
    pub generated_at_unix: u64,
    pub notes: Vec<String>,
}

const RECORD_COUNT_NOTE: &str =
    "record_count in reportable_aggregates.tsv is rounded to the precision p but is not subject to the threshold k";

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
pub fn current_timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

/// Tracks files written so far and deletes them unless the run completes.
struct Emitter {
    dir: PathBuf,
    written: Vec<PathBuf>,
    files: Vec<ManifestFile>,
    done: bool,
}

impl Emitter {
    fn new(dir: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(dir).map_err(|source| PipelineError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Emitter {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            files: Vec::new(),
            done: false,
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        std::fs::write(&path, bytes).map_err(|source| PipelineError::Write { path, source })?;
        self.files.push(ManifestFile {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    fn write_with<F>(&mut self, name: &str, f: F) -> Result<(), PipelineError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|source| PipelineError::Write {
            path: self.dir.join(name),
            source,
        })?;
        self.write(name, &buf)
    }
}

impl Drop for Emitter {
    fn drop(&mut self) {
        if !self.done {
            for path in &self.written {
                let _ = std::fs::remove_file(path);
            }
        }
    }
}

/// Runs the full pipeline with the current time in the manifest.
pub fn run_pipeline(config: &PipelineConfig) -> Result<ArtifactManifest, PipelineError> {
    run_pipeline_at(config, current_timestamp())
}

/// Runs the full pipeline, stamping the manifest with `generated_at_unix`.
/// Every other output depends only on the config and input bytes.
pub fn run_pipeline_at(config: &PipelineConfig, generated_at_unix: u64) -> Result<ArtifactManifest, PipelineError> {
    config.validate()?;
    let bytes = std::fs::read(&config.input_path).map_err(|source| PipelineError::ReadInput {
        path: config.input_path.clone(),
        source,
    })?;
    let dataset = ingest(&bytes, config)?;
    let index = AttributeIndex::build(&dataset);
    log::info!(
        "ingested {} records, {} columns, {} distinct attribute values",
        dataset.len(),
        dataset.columns().len(),
        index.vocabulary().len()
    );

    let k = config.reporting_threshold;
    let p = config.reporting_precision;
    let len = config.reporting_length;
    let cap = config.max_combinations_per_record;

    let aggregates = compute_aggregates(&index, len, cap).map_err(PipelineError::Aggregates)?;
    let protected = protect(&aggregates, k, p);
    log::info!(
        "{} combinations counted, {} released",
        aggregates.len(),
        protected.len()
    );

    let mut rng = seeded_rng(config.rng_seed);
    let result = synthesize(config.mode, &dataset, &index, &protected.singletons(), k, &mut rng)?;
    log::info!(
        "{} synthetic records, synthesis ratio {}",
        result.records.len(),
        result.synthesis_ratio
    );

    let summary: EvaluationSummary<f64> = evaluate(&index, &aggregates, &result.records, k, len, cap)?;

    let mut emitter = Emitter::new(&config.output_dir)?;
    emitter.write_with(SYNTHETIC_FILE, |b| result.write_tsv(b, dataset.columns()))?;
    emitter.write_with(AGGREGATES_FILE, |b| protected.write_tsv(b))?;
    let reports = summary.report_files().map_err(|source| PipelineError::Write {
        path: config.output_dir.clone(),
        source,
    })?;
    for (name, bytes) in &reports {
        emitter.write(name, bytes)?;
    }
    let bundle = ExplorerBundle::new(dataset.columns(), &config.pages, &result.records, &protected);
    let bundle_json = bundle.to_json().map_err(|e| PipelineError::Write {
        path: config.output_dir.join(BUNDLE_FILE),
        source: e.into(),
    })?;
    emitter.write(BUNDLE_FILE, &bundle_json)?;

    let ratio = result.synthesis_ratio;
    let manifest = ArtifactManifest {
        files: emitter.files.clone(),
        parameters: ManifestParameters {
            k,
            p,
            reporting_length: len,
            mode: config.mode,
            rng_seed: config.rng_seed,
        },
        dataset: DatasetStats {
            records: dataset.len(),
            columns: dataset.columns().len(),
            attribute_values: index.vocabulary().len(),
        },
        synthetic_records: result.records.len(),
        synthesis_ratio: format!("{}/{}", ratio.numer(), ratio.denom()),
        synthesis_ratio_value: *ratio.numer() as f64 / *ratio.denom() as f64,
        released_combinations: protected.len(),
        leaked_combinations: summary.total_leaks(),
        generated_at_unix,
        notes: vec![RECORD_COUNT_NOTE.to_string()],
    };
    let mut manifest_json = serde_json::to_vec_pretty(&manifest).map_err(|e| PipelineError::Write {
        path: config.output_dir.join(MANIFEST_FILE),
        source: e.into(),
    })?;
    manifest_json.push(b'\n');
    let manifest_path = config.output_dir.join(MANIFEST_FILE);
    emitter.written.push(manifest_path.clone());
    std::fs::write(&manifest_path, manifest_json).map_err(|source| PipelineError::Write {
        path: manifest_path,
        source,
    })?;
    emitter.done = true;
    Ok(manifest)
}

/// Inputs for evaluating an existing synthetic file against its sensitive source.
#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub sensitive: PathBuf,
    pub synthetic: PathBuf,
    pub k: u64,
    pub reporting_length: usize,
    pub delimiter: u8,
    pub sensitive_zeros: Vec<String>,
    pub output_dir: Option<PathBuf>,
    pub max_combinations_per_record: u64,
}

impl EvaluateOptions {
    pub fn new(sensitive: impl Into<PathBuf>, synthetic: impl Into<PathBuf>, k: u64, reporting_length: usize) -> Self {
        EvaluateOptions {
            sensitive: sensitive.into(),
            synthetic: synthetic.into(),
            k,
            reporting_length,
            delimiter: b'\t',
            sensitive_zeros: Vec::new(),
            output_dir: None,
            max_combinations_per_record: crate::config::DEFAULT_COMBINATION_CAP,
        }
    }
}

fn read_dataset(path: &Path, config: &PipelineConfig) -> Result<crate::SensitiveDataset, PipelineError> {
    let bytes = std::fs::read(path).map_err(|source| PipelineError::ReadInput {
        path: path.to_path_buf(),
        source,
    })?;
    ingest(&bytes, config)
}

/// Computes the four evaluation tables for any synthetic file and, when an
/// output directory is given, writes the TSV and SVG reports there.
pub fn evaluate_files(options: &EvaluateOptions) -> Result<EvaluationSummary<f64>, PipelineError> {
    let mut config = PipelineConfig::new(&options.sensitive, options.output_dir.clone().unwrap_or_default());
    config.delimiter = options.delimiter;
    config.sensitive_zeros = options.sensitive_zeros.clone();
    config.reporting_threshold = options.k;
    config.reporting_length = options.reporting_length;
    config.max_combinations_per_record = options.max_combinations_per_record;
    config.validate()?;

    let sensitive = read_dataset(&options.sensitive, &config)?;
    // Sensitive-zero columns that the synthetic file lacks are not an error.
    let mut synthetic_config = config.clone();
    let synthetic_header = {
        let bytes = std::fs::read(&options.synthetic).map_err(|source| PipelineError::ReadInput {
            path: options.synthetic.clone(),
            source,
        })?;
        crate::ingest::parse_table(&bytes, options.delimiter)?.header
    };
    synthetic_config.sensitive_zeros = options
        .sensitive_zeros
        .iter()
        .filter(|c| synthetic_header.contains(c))
        .cloned()
        .collect();
    let synthetic = read_dataset(&options.synthetic, &synthetic_config)?;

    let index = AttributeIndex::build(&sensitive);
    let aggregates = compute_aggregates(&index, options.reporting_length, options.max_combinations_per_record)
        .map_err(PipelineError::Aggregates)?;
    let records: Vec<crate::SyntheticRecord> = synthetic
        .records()
        .iter()
        .filter(|r| !r.attributes.is_empty())
        .map(|r| crate::SyntheticRecord::new(r.attributes.iter().cloned()))
        .collect();
    let summary = evaluate(
        &index,
        &aggregates,
        &records,
        options.k,
        options.reporting_length,
        options.max_combinations_per_record,
    )?;

    if let Some(dir) = &options.output_dir {
        std::fs::create_dir_all(dir).map_err(|source| PipelineError::Write {
            path: dir.clone(),
            source,
        })?;
        summary.emit_reports(dir).map_err(|source| PipelineError::Write {
            path: dir.clone(),
            source,
        })?;
    }
    Ok(summary)
}
