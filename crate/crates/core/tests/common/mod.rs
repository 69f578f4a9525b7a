//! Fixtures and a brute-force oracle shared by the integration tests.
//!
//! The oracle works directly on TSV text: an attribute is the string
//! `column:value` for every cell that is neither empty nor `"0"`, and blank
//! lines are skipped. Counting scans every record; nothing here uses the
//! library's index or enumerator.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use synthpipe_core::benchmark::{generate_table, to_tsv, BenchmarkSpec};

/// `(column, value)`; ordered by column, then value.
pub type Attr = (String, String);
pub type Record = BTreeSet<Attr>;

pub fn label(a: &Attr) -> String {
    format!("{}:{}", a.0, a.1)
}

/// Selections string of a combination: labels joined by `;` in attribute order.
pub fn selections<'a, I: IntoIterator<Item = &'a Attr>>(combo: I) -> String {
    combo.into_iter().map(label).collect::<Vec<_>>().join(";")
}

/// Parses TSV text into attribute sets.
pub fn oracle_records(tsv: &str) -> Vec<Record> {
    let mut lines = tsv.lines();
    let header: Vec<&str> = lines.next().map(|h| h.split('\t').collect()).unwrap_or_default();
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            line.split('\t')
                .zip(&header)
                .filter(|(cell, _)| !cell.trim().is_empty() && cell.trim() != "0")
                .map(|(cell, col)| (col.to_string(), cell.trim().to_string()))
                .collect()
        })
        .collect()
}

/// Number of records containing every attribute of `combo`.
pub fn oracle_count<'a, I>(records: &[Record], combo: I) -> u64
where
    I: IntoIterator<Item = &'a Attr> + Clone,
{
    records
        .iter()
        .filter(|r| combo.clone().into_iter().all(|a| r.contains(a)))
        .count() as u64
}

fn subsets_into(items: &[&Attr], max: usize, start: usize, current: &mut Vec<Attr>, out: &mut BTreeSet<Vec<Attr>>) {
    if !current.is_empty() {
        out.insert(current.clone());
    }
    if current.len() == max {
        return;
    }
    for i in start..items.len() {
        current.push(items[i].clone());
        subsets_into(items, max, i + 1, current, out);
        current.pop();
    }
}

/// Every distinct combination of length `1..=max_length` occurring in some
/// record, with its count from a full scan.
pub fn oracle_counts(records: &[Record], max_length: usize) -> BTreeMap<Vec<Attr>, u64> {
    let mut combos = BTreeSet::new();
    for r in records {
        let items: Vec<&Attr> = r.iter().collect();
        subsets_into(&items, max_length, 0, &mut Vec::new(), &mut combos);
    }
    combos
        .into_iter()
        .map(|c| {
            let n = oracle_count(records, &c);
            (c, n)
        })
        .collect()
}

/// Threshold, round half up to a multiple of `p`, threshold again.
pub fn oracle_protect(raw: u64, k: u64, p: u64) -> Option<u64> {
    if raw < k {
        return None;
    }
    let below = raw - raw % p;
    let rounded = if 2 * (raw - below) >= p { below + p } else { below };
    (rounded >= k).then_some(rounded)
}

/// The reportable-aggregates file an oracle would write.
pub fn oracle_aggregates_tsv(records: &[Record], k: u64, p: u64, max_length: usize) -> String {
    let mut rows: Vec<(String, u64)> = oracle_counts(records, max_length)
        .into_iter()
        .filter_map(|(c, n)| oracle_protect(n, k, p).map(|r| (selections(&c), r)))
        .collect();
    rows.sort();
    let total = records.len() as u64;
    let below = total - total % p;
    let total = if 2 * (total - below) >= p { below + p } else { below };
    let mut out = format!("selections\tprotected_count\nrecord_count\t{total}\n");
    for (s, n) in rows {
        out.push_str(&format!("{s}\t{n}\n"));
    }
    out
}

/// Parses a `selections\tcount` file (after its header) into rows.
pub fn parse_aggregates(text: &str) -> Vec<(String, u64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let (s, n) = l.split_once('\t').expect("two columns");
            (s.to_string(), n.parse().expect("integer count"))
        })
        .collect()
}

/// Per-attribute occurrence totals.
pub fn attribute_totals(records: &[Record]) -> BTreeMap<Attr, u64> {
    let mut totals = BTreeMap::new();
    for r in records {
        for a in r {
            *totals.entry(a.clone()).or_insert(0) += 1;
        }
    }
    totals
}

/// One randomized sparse fixture: the TSV text plus its parameters.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub tsv: String,
    pub k: u64,
    pub p: u64,
    pub reporting_length: usize,
    pub seed: u64,
}

/// `n` sparse fixtures with 500..=2000 records, 10..=30 columns and k in {2, 5, 10}.
pub fn sparse_fixtures(n: usize, seed: u64) -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let records = rng.gen_range(500..=2000);
            let columns = rng.gen_range(10..=30);
            let mut spec = BenchmarkSpec::sparse(records, columns);
            spec.profiles = rng.gen_range(2..=8);
            spec.missing_rate = rng.gen_range(0.05..0.4);
            spec.max_presence = rng.gen_range(0.2..0.6);
            let k = [2, 5, 10][i % 3];
            let p = [1, 5, 10][(i / 3) % 3];
            let table_seed = rng.gen();
            Fixture {
                name: format!("fixture{i:02}_{records}x{columns}_k{k}_p{p}"),
                tsv: to_tsv(&generate_table(&spec, table_seed)),
                k,
                p,
                reporting_length: 3 + i % 2,
                seed: rng.gen(),
            }
        })
        .collect()
}

/// A tiny random table (at most `max_records` rows and `max_columns`
/// columns) mixing categorical and 0/1 columns with empty cells.
pub fn tiny_table(rng: &mut impl Rng, max_records: usize, max_columns: usize) -> String {
    let columns = rng.gen_range(1..=max_columns);
    let records = rng.gen_range(1..=max_records);
    let binary: Vec<bool> = (0..columns).map(|_| rng.gen_bool(0.5)).collect();
    let header: Vec<String> = (0..columns).map(|c| format!("c{c}")).collect();
    let mut out = header.join("\t");
    out.push('\n');
    for _ in 0..records {
        let row: Vec<String> = binary
            .iter()
            .map(|&b| {
                if b {
                    if rng.gen_bool(0.5) { "1" } else { "0" }.to_string()
                } else if rng.gen_bool(0.25) {
                    String::new()
                } else {
                    ["x", "y", "z"][rng.gen_range(0..3)].to_string()
                }
            })
            .collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, text: &str) {
    std::fs::write(path, text).expect("write fixture");
}

/// Attribute strings of every record in a synthetic TSV.
pub fn synthetic_records(path: &Path) -> Vec<Record> {
    oracle_records(&std::fs::read_to_string(path).expect("read synthetic output"))
}

/// True iff `small` is a subset of `big`.
pub fn subset(small: &Record, big: &Record) -> bool {
    small.iter().all(|a| big.contains(a))
}

/// Full-scan counter over records stored as bitsets, for larger fixtures.
pub struct BitOracle {
    ids: BTreeMap<Attr, usize>,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl BitOracle {
    pub fn new(records: &[Record]) -> Self {
        let mut ids = BTreeMap::new();
        for a in records.iter().flatten() {
            let next = ids.len();
            ids.entry(a.clone()).or_insert(next);
        }
        let words = ids.len().div_ceil(64).max(1);
        let rows = records.iter().map(|r| Self::bits(&ids, words, r).expect("known attributes")).collect();
        BitOracle { ids, words, rows }
    }

    fn bits(ids: &BTreeMap<Attr, usize>, words: usize, combo: &Record) -> Option<Vec<u64>> {
        let mut bits = vec![0u64; words];
        for a in combo {
            let i = *ids.get(a)?;
            bits[i / 64] |= 1 << (i % 64);
        }
        Some(bits)
    }

    /// Records containing every attribute of `combo`.
    pub fn count(&self, combo: &Record) -> u64 {
        let Some(want) = Self::bits(&self.ids, self.words, combo) else {
            return 0;
        };
        self.rows
            .iter()
            .filter(|row| row.iter().zip(&want).all(|(r, w)| r & w == *w))
            .count() as u64
    }
}
