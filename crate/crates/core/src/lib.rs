//! Synthetic microdata with k-synthetic anonymity, protected aggregate counts
//! of attribute combinations, and utility/privacy evaluation.
//!
//! The pipeline reads categorical microdata, builds an inverted index over
//! attribute values, releases thresholded and rounded combination counts, and
//! synthesizes records whose every attribute combination occurs at least `k`
//! times in the sensitive data.

pub mod aggregates;
pub mod benchmark;
pub mod bundle;
pub mod combinations;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod ingest;
mod joint;
pub mod pipeline;
pub mod synthesis;

pub use aggregates::{compute_aggregates, protect, AggregateCounts, ProtectedAggregates};
pub use bundle::ExplorerBundle;
pub use combinations::{enumerate_subsets, AttributeIndex, Combination};
pub use config::{load_config, ConfigOverrides, PipelineConfig, SynthesisMode};
pub use error::{CombinationError, ConfigError, EvaluationError, IngestError, PipelineError, SynthesisError};
pub use evaluation::{evaluate, EvaluationSummary};
pub use ingest::{ingest, AttributeValue, SensitiveDataset};
pub use pipeline::{run_pipeline, run_pipeline_at, ArtifactManifest};
pub use synthesis::{seeded_rng, synthesize, SynthesisResult, SyntheticRecord};

/// Exact synthetic-to-sensitive record ratio.
pub type SynthesisRatio = num_rational::Ratio<u64>;

pub type EvaluationSummary64 = evaluation::EvaluationSummary<f64>;
pub type EvaluationSummary32 = evaluation::EvaluationSummary<f32>;
pub type RareRow64 = evaluation::RareRow<f64>;
pub type LeakageRow64 = evaluation::LeakageRow<f64>;
pub type PreservationByLengthRow64 = evaluation::PreservationByLengthRow<f64>;
pub type PreservationByCountRow64 = evaluation::PreservationByCountRow<f64>;
