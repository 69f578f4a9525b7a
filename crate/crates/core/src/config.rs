//! Pipeline configuration: JSON document plus command-line overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// How synthetic records are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthesisMode {
    Seeded,
    Unseeded,
}

impl std::str::FromStr for SynthesisMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "seeded" => Ok(SynthesisMode::Seeded),
            "unseeded" => Ok(SynthesisMode::Unseeded),
            other => Err(format!("unknown mode {other:?} (expected seeded or unseeded)")),
        }
    }
}

impl std::fmt::Display for SynthesisMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SynthesisMode::Seeded => "seeded",
            SynthesisMode::Unseeded => "unseeded",
        })
    }
}

/// Binning rule for a numeric column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantization {
    /// Explicit, strictly increasing bin edges.
    Edges(Vec<f64>),
    /// Fixed-width bins anchored at zero.
    Width { width: f64 },
}

/// A visual on an explorer page: one column or a named group of columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Visual {
    Column(String),
    Group { name: String, columns: Vec<String> },
}

impl Visual {
    pub fn columns(&self) -> Vec<&str> {
        match self {
            Visual::Column(c) => vec![c.as_str()],
            Visual::Group { columns, .. } => columns.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub title: String,
    pub visuals: Vec<Visual>,
}

pub const DEFAULT_COMBINATION_CAP: u64 = 1_000_000;

/// Validated pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub input_path: PathBuf,
    pub delimiter: u8,
    pub use_columns: Vec<String>,
    pub sensitive_zeros: Vec<String>,
    pub absence_tokens: Vec<String>,
    pub quantization: BTreeMap<String, Quantization>,
    pub reporting_threshold: u64,
    pub reporting_precision: u64,
    pub reporting_length: usize,
    pub mode: SynthesisMode,
    pub rng_seed: u64,
    pub output_dir: PathBuf,
    /// Empty means one default page with a visual per column.
    pub pages: Vec<Page>,
    pub max_combinations_per_record: u64,
}

impl PipelineConfig {
    /// A configuration with default parameters for the given input and output locations.
    pub fn new(input_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input_path: input_path.into(),
            delimiter: b'\t',
            use_columns: Vec::new(),
            sensitive_zeros: Vec::new(),
            absence_tokens: default_absence_tokens(),
            quantization: BTreeMap::new(),
            reporting_threshold: 10,
            reporting_precision: 10,
            reporting_length: 4,
            mode: SynthesisMode::Seeded,
            rng_seed: 0,
            output_dir: output_dir.into(),
            pages: Vec::new(),
            max_combinations_per_record: DEFAULT_COMBINATION_CAP,
        }
    }

    /// Checks the scalar invariants. Column references are checked against
    /// the input header by [`PipelineConfig::validate_columns`].
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.reporting_threshold < 1 {
            return Err(ConfigError::invalid("reporting_threshold", "k must be at least 1"));
        }
        if self.reporting_precision < 1 {
            return Err(ConfigError::invalid("reporting_precision", "p must be at least 1"));
        }
        if self.reporting_length < 1 {
            return Err(ConfigError::invalid("reporting_length", "length must be at least 1"));
        }
        if self.max_combinations_per_record < 1 {
            return Err(ConfigError::invalid(
                "max_combinations_per_record",
                "cap must be at least 1",
            ));
        }
        for (column, q) in &self.quantization {
            match q {
                Quantization::Edges(edges) => {
                    if edges.len() < 2 {
                        return Err(ConfigError::invalid(
                            "quantization",
                            format!("column {column}: at least two bin edges are required"),
                        ));
                    }
                    if edges.iter().any(|e| !e.is_finite())
                        || edges.windows(2).any(|w| w[0] >= w[1])
                    {
                        return Err(ConfigError::invalid(
                            "quantization",
                            format!("column {column}: bin edges must be finite and strictly increasing"),
                        ));
                    }
                }
                Quantization::Width { width } => {
                    if !(width.is_finite() && *width > 0.0) {
                        return Err(ConfigError::invalid(
                            "quantization",
                            format!("column {column}: bin width must be positive"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Every column named by the config must be among the selected columns
    /// (`use_columns`, or the whole header when that is empty).
    pub fn validate_columns(&self, header: &[String]) -> Result<(), ConfigError> {
        let header_set: BTreeSet<&str> = header.iter().map(String::as_str).collect();
        for c in &self.use_columns {
            if !header_set.contains(c.as_str()) {
                return Err(ConfigError::invalid(
                    "use_columns",
                    format!("column {c:?} is not in the input header"),
                ));
            }
        }
        let selected: BTreeSet<&str> = if self.use_columns.is_empty() {
            header_set
        } else {
            self.use_columns.iter().map(String::as_str).collect()
        };
        let check = |field: &'static str, column: &str| {
            if selected.contains(column) {
                Ok(())
            } else {
                Err(ConfigError::invalid(
                    field,
                    format!("column {column:?} is not among the selected columns"),
                ))
            }
        };
        for c in &self.sensitive_zeros {
            check("sensitive_zeros", c)?;
        }
        for c in self.quantization.keys() {
            check("quantization", c)?;
        }
        for page in &self.pages {
            for visual in &page.visuals {
                for c in visual.columns() {
                    check("pages", c)?;
                }
            }
        }
        Ok(())
    }
}

pub fn default_absence_tokens() -> Vec<String> {
    vec![String::new(), "0".to_string()]
}

/// Command-line overrides for scalar fields.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub k: Option<u64>,
    pub p: Option<u64>,
    pub len: Option<usize>,
    pub mode: Option<SynthesisMode>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub delimiter: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct RawConfig {
    input_path: Option<PathBuf>,
    delimiter: Option<String>,
    #[serde(default)]
    use_columns: Vec<String>,
    #[serde(default)]
    sensitive_zeros: Vec<String>,
    absence_tokens: Option<Vec<String>>,
    #[serde(default)]
    quantization: BTreeMap<String, Quantization>,
    #[serde(alias = "k")]
    reporting_threshold: Option<i64>,
    #[serde(alias = "p")]
    reporting_precision: Option<i64>,
    #[serde(alias = "len", alias = "l")]
    reporting_length: Option<i64>,
    mode: Option<SynthesisMode>,
    rng_seed: Option<u64>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    pages: Vec<Page>,
    max_combinations_per_record: Option<u64>,
}

const KNOWN_FIELDS: &[&str] = &[
    "input_path",
    "delimiter",
    "use_columns",
    "sensitive_zeros",
    "absence_tokens",
    "quantization",
    "reporting_threshold",
    "k",
    "reporting_precision",
    "p",
    "reporting_length",
    "len",
    "l",
    "mode",
    "rng_seed",
    "output_dir",
    "pages",
    "max_combinations_per_record",
];

/// Parses a delimiter given as a single character, an escape (`\t`) or a name.
pub fn parse_delimiter(s: &str) -> Result<u8, ConfigError> {
    let byte = match s {
        "\\t" | "tab" | "TAB" | "\t" => b'\t',
        "comma" => b',',
        "semicolon" => b';',
        "pipe" => b'|',
        _ => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii() => c as u8,
                _ => {
                    return Err(ConfigError::invalid(
                        "delimiter",
                        format!("{s:?} is not a single ASCII character"),
                    ))
                }
            }
        }
    };
    if byte == b'\n' || byte == b'\r' || byte == b'"' {
        return Err(ConfigError::invalid("delimiter", format!("{s:?} cannot be used")));
    }
    Ok(byte)
}

fn to_positive<T: TryFrom<i64>>(field: &'static str, v: i64) -> Result<T, ConfigError> {
    if v < 1 {
        return Err(ConfigError::invalid(field, format!("must be at least 1, got {v}")));
    }
    T::try_from(v).map_err(|_| ConfigError::invalid(field, format!("{v} is out of range")))
}

/// Parses a JSON config document, applies overrides and validates the result.
/// Unknown fields are reported through `log::warn!` and otherwise ignored.
pub fn parse_config(json: &str, overrides: &ConfigOverrides) -> Result<PipelineConfig, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    if let Some(obj) = value.as_object() {
        for key in obj.keys() {
            if !KNOWN_FIELDS.contains(&key.as_str()) {
                log::warn!("ignoring unknown config field `{key}`");
            }
        }
    }
    let raw: RawConfig = serde_json::from_value(value)?;

    let input_path = overrides
        .input
        .clone()
        .or(raw.input_path)
        .ok_or_else(|| ConfigError::invalid("input_path", "required"))?;
    let output_dir = overrides
        .output_dir
        .clone()
        .or(raw.output_dir)
        .unwrap_or_else(|| PathBuf::from("output"));
    let mut config = PipelineConfig::new(input_path, output_dir);

    if let Some(d) = overrides.delimiter.as_deref().or(raw.delimiter.as_deref()) {
        config.delimiter = parse_delimiter(d)?;
    }
    config.use_columns = raw.use_columns;
    config.sensitive_zeros = raw.sensitive_zeros;
    if let Some(tokens) = raw.absence_tokens {
        config.absence_tokens = tokens;
    }
    config.quantization = raw.quantization;
    if let Some(k) = raw.reporting_threshold {
        config.reporting_threshold = to_positive("reporting_threshold", k)?;
    }
    if let Some(p) = raw.reporting_precision {
        config.reporting_precision = to_positive("reporting_precision", p)?;
    }
    if let Some(l) = raw.reporting_length {
        config.reporting_length = to_positive("reporting_length", l)?;
    }
    if let Some(mode) = raw.mode {
        config.mode = mode;
    }
    if let Some(seed) = raw.rng_seed {
        config.rng_seed = seed;
    }
    config.pages = raw.pages;
    if let Some(cap) = raw.max_combinations_per_record {
        config.max_combinations_per_record = cap;
    }

    if let Some(k) = overrides.k {
        config.reporting_threshold = k;
    }
    if let Some(p) = overrides.p {
        config.reporting_precision = p;
    }
    if let Some(l) = overrides.len {
        config.reporting_length = l;
    }
    if let Some(mode) = overrides.mode {
        config.mode = mode;
    }
    if let Some(seed) = overrides.seed {
        config.rng_seed = seed;
    }

    config.validate()?;
    Ok(config)
}

/// Reads and parses the config file at `path`.
pub fn load_config(path: &Path, overrides: &ConfigOverrides) -> Result<PipelineConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, overrides)
}
