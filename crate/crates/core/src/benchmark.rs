//! Seeded generator of sparse categorical microdata for tests, benchmarks and demos.
//!
//! Records are drawn from a mixture of latent profiles so that attributes are
//! correlated: each profile has its own category preferences for the
//! single-valued columns and its own presence probabilities for the binary
//! columns. The output is a [`RawTable`] that goes through normal ingestion.

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ingest::RawTable;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub records: usize,
    /// Categorical columns, each with its own number of categories.
    pub categorical_columns: Vec<usize>,
    /// Binary presence columns (multi-valued attribute encoding).
    pub binary_columns: usize,
    pub profiles: usize,
    /// Probability that a categorical cell is left empty.
    pub missing_rate: f64,
    /// Upper bound on a binary column's presence probability within a profile.
    pub max_presence: f64,
}

impl BenchmarkSpec {
    /// A generator setup with `columns` total columns, roughly a third categorical.
    pub fn sparse(records: usize, columns: usize) -> Self {
        let categorical = (columns / 3).max(1);
        BenchmarkSpec {
            records,
            categorical_columns: (0..categorical).map(|i| 3 + i % 6).collect(),
            binary_columns: columns.saturating_sub(categorical),
            profiles: 6,
            missing_rate: 0.15,
            max_presence: 0.45,
        }
    }

    pub fn column_count(&self) -> usize {
        self.categorical_columns.len() + self.binary_columns
    }
}

/// Column names: `cat_NN` for categorical columns, `bin_NN` for binary ones.
pub fn column_names(spec: &BenchmarkSpec) -> Vec<String> {
    (0..spec.categorical_columns.len())
        .map(|i| format!("cat_{i:02}"))
        .chain((0..spec.binary_columns).map(|i| format!("bin_{i:02}")))
        .collect()
}

struct Profile {
    categorical: Vec<WeightedIndex<f64>>,
    presence: Vec<f64>,
}

fn make_profile<R: Rng>(spec: &BenchmarkSpec, rng: &mut R) -> Profile {
    let categorical = spec
        .categorical_columns
        .iter()
        .map(|&n| {
            // Skewed preference: geometric decay over a random permutation of categories.
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let mut weights = vec![0.0; n];
            for (rank, &cat) in order.iter().enumerate() {
                weights[cat] = 0.45f64.powi(rank as i32);
            }
            WeightedIndex::new(weights).expect("positive weights")
        })
        .collect();
    let presence = (0..spec.binary_columns)
        .map(|_| {
            let u: f64 = rng.gen();
            spec.max_presence * u * u * u
        })
        .collect();
    Profile { categorical, presence }
}

/// Generates a table deterministically from `spec` and `seed`.
pub fn generate_table(spec: &BenchmarkSpec, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles: Vec<Profile> = (0..spec.profiles.max(1)).map(|_| make_profile(spec, &mut rng)).collect();
    let profile_weights: Vec<f64> = (0..profiles.len()).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    let pick_profile = WeightedIndex::new(profile_weights).expect("positive weights");

    let header = column_names(spec);
    let rows = (0..spec.records)
        .map(|_| {
            let profile = &profiles[pick_profile.sample(&mut rng)];
            let mut row = Vec::with_capacity(header.len());
            for dist in &profile.categorical {
                let cat = dist.sample(&mut rng);
                if rng.gen_bool(spec.missing_rate) {
                    row.push(String::new());
                } else {
                    row.push(format!("v{cat}"));
                }
            }
            for &p in &profile.presence {
                row.push(if rng.gen_bool(p) { "1".into() } else { "0".into() });
            }
            row
        })
        .collect();
    RawTable { header, rows }
}

/// The table as TSV text.
pub fn to_tsv(table: &RawTable) -> String {
    let mut out = table.header.join("\t");
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}
