//! The explorer bundle: one static JSON document with everything the
//! in-browser explorer needs (columns, pages, parameters, synthetic records
//! and protected aggregates).

use serde::{Deserialize, Serialize};

use crate::aggregates::ProtectedAggregates;
use crate::config::{Page, Visual};
use crate::ingest::ColumnInfo;
use crate::synthesis::SyntheticRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleParameters {
    pub k: u64,
    pub p: u64,
    pub reporting_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorerBundle {
    pub columns: Vec<ColumnInfo>,
    pub pages: Vec<Page>,
    pub parameters: BundleParameters,
    /// One array per record, cells aligned with `columns` (empty = absent).
    pub synthetic_records: Vec<Vec<String>>,
    /// `[selections, protected_count]` pairs in file order, total first.
    pub aggregates: Vec<(String, u64)>,
}

/// Single page listing one visual per column.
pub fn default_pages(columns: &[ColumnInfo]) -> Vec<Page> {
    vec![Page {
        title: "All attributes".to_string(),
        visuals: columns.iter().map(|c| Visual::Column(c.name.clone())).collect(),
    }]
}

impl ExplorerBundle {
    pub fn new(
        columns: &[ColumnInfo],
        pages: &[Page],
        records: &[SyntheticRecord],
        aggregates: &ProtectedAggregates,
    ) -> Self {
        let synthetic_records = records
            .iter()
            .map(|r| {
                columns
                    .iter()
                    .map(|c| {
                        r.attributes
                            .values()
                            .iter()
                            .find(|a| a.column == c.name)
                            .map(|a| a.value.clone())
                            .unwrap_or_default()
                    })
                    .collect()
            })
            .collect();
        ExplorerBundle {
            columns: columns.to_vec(),
            pages: if pages.is_empty() {
                default_pages(columns)
            } else {
                pages.to_vec()
            },
            parameters: BundleParameters {
                k: aggregates.threshold,
                p: aggregates.precision,
                reporting_length: aggregates.max_length,
            },
            synthetic_records,
            aggregates: aggregates.rows(),
        }
    }

    pub fn to_json(&self) -> serde_json::Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }
}
