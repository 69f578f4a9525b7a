//! Counts of attribute combinations up to a reporting length, and their
//! protection by minimum threshold and rounding precision.
//!
//! Counts are keyed by sorted attribute-id lists against the index
//! vocabulary; [`Combination`] values are materialized on demand.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::combinations::{check_enumeration_cap, for_each_subset, AttrId, AttributeIndex, Combination};
use crate::error::CombinationError;
use crate::ingest::AttributeValue;

/// Sentinel `selections` value carrying the protected dataset total.
pub const RECORD_COUNT_KEY: &str = "record_count";

/// Combination counts keyed by sorted attribute-id lists.
///
/// When every id fits in `width` bits and `width * max_length <= 128`, keys
/// are packed into a `u128` (ids stored off by one, so a zero field ends the
/// key). Otherwise keys are boxed slices.
#[derive(Debug, Clone)]
pub enum IdCounts {
    Packed { width: u32, map: FxHashMap<u128, u64> },
    Boxed(FxHashMap<Box<[AttrId]>, u64>),
}

const MAX_PACKED_LEN: usize = 16;

impl IdCounts {
    /// Empty counts for ids below `alphabet` and keys of at most `max_length` ids.
    pub fn new(alphabet: usize, max_length: usize) -> Self {
        let width = usize::BITS - alphabet.leading_zeros();
        if max_length <= MAX_PACKED_LEN && width as usize * max_length <= 128 {
            IdCounts::Packed {
                width: width.max(1),
                map: FxHashMap::default(),
            }
        } else {
            IdCounts::Boxed(FxHashMap::default())
        }
    }

    fn empty_like(&self) -> Self {
        match self {
            IdCounts::Packed { width, .. } => IdCounts::Packed {
                width: *width,
                map: FxHashMap::default(),
            },
            IdCounts::Boxed(_) => IdCounts::Boxed(FxHashMap::default()),
        }
    }

    fn pack(width: u32, ids: &[AttrId]) -> u128 {
        ids.iter().fold(0u128, |key, &id| (key << width) | (id as u128 + 1))
    }

    fn unpack(width: u32, mut key: u128, buf: &mut [AttrId; MAX_PACKED_LEN]) -> usize {
        let mask = (1u128 << width) - 1;
        let mut n = 0;
        while key != 0 {
            buf[n] = (key & mask) as AttrId - 1;
            key >>= width;
            n += 1;
        }
        buf[..n].reverse();
        n
    }

    pub fn add(&mut self, ids: &[AttrId], n: u64) {
        match self {
            IdCounts::Packed { width, map } => *map.entry(Self::pack(*width, ids)).or_insert(0) += n,
            IdCounts::Boxed(map) => {
                if let Some(c) = map.get_mut(ids) {
                    *c += n;
                } else {
                    map.insert(ids.into(), n);
                }
            }
        }
    }

    pub fn get(&self, ids: &[AttrId]) -> Option<u64> {
        match self {
            IdCounts::Packed { width, map } => {
                let limit = (1u64 << *width) - 1;
                if ids.len() > MAX_PACKED_LEN
                    || ids.len() * *width as usize > 128
                    || ids.iter().any(|&id| id as u64 >= limit)
                {
                    return None;
                }
                map.get(&Self::pack(*width, ids)).copied()
            }
            IdCounts::Boxed(map) => map.get(ids).copied(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            IdCounts::Packed { map, .. } => map.len(),
            IdCounts::Boxed(map) => map.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lends every `(ids, count)` pair to `f`, in arbitrary order.
    pub fn for_each<F: FnMut(&[AttrId], u64)>(&self, mut f: F) {
        match self {
            IdCounts::Packed { width, map } => {
                let mut buf = [0; MAX_PACKED_LEN];
                for (&key, &c) in map {
                    let n = Self::unpack(*width, key, &mut buf);
                    f(&buf[..n], c);
                }
            }
            IdCounts::Boxed(map) => {
                for (ids, &c) in map {
                    f(ids, c);
                }
            }
        }
    }

    /// Keeps the entries for which `f` returns a new count.
    pub fn filter_map<F: Fn(u64) -> Option<u64>>(&self, f: F) -> Self {
        match self {
            IdCounts::Packed { width, map } => IdCounts::Packed {
                width: *width,
                map: map.iter().filter_map(|(&k, &c)| f(c).map(|c| (k, c))).collect(),
            },
            IdCounts::Boxed(map) => {
                IdCounts::Boxed(map.iter().filter_map(|(k, &c)| f(c).map(|c| (k.clone(), c))).collect())
            }
        }
    }

    fn merge(self, other: Self) -> Self {
        let (mut into, from) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        match (&mut into, from) {
            (IdCounts::Packed { map: a, .. }, IdCounts::Packed { map: b, .. }) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
            (IdCounts::Boxed(a), IdCounts::Boxed(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
            (_, from) => from.for_each(|ids, c| into.add(ids, c)),
        }
        into
    }
}

const CHUNK: usize = 2048;

/// Counts every combination of length `1..=max_length` occurring in `records`
/// (each record given as sorted attribute ids). Counting is partitioned
/// across rayon workers and merged by summation.
pub fn count_id_combinations(
    records: &[Vec<AttrId>],
    max_length: usize,
    cap: u64,
) -> Result<IdCounts, CombinationError> {
    for (i, r) in records.iter().enumerate() {
        check_enumeration_cap(i, r.len(), max_length, cap)?;
    }
    let alphabet = records.iter().flatten().max().map_or(0, |&m| m as usize + 1);
    let longest = records.iter().map(Vec::len).max().unwrap_or(0).min(max_length);
    let empty = IdCounts::new(alphabet, longest);
    let merged = records
        .par_iter()
        .with_min_len(CHUNK)
        .fold(
            || empty.empty_like(),
            |mut local, record| {
                for_each_subset(record, max_length, |s| local.add(s, 1));
                local
            },
        )
        .reduce(|| empty.empty_like(), IdCounts::merge);
    Ok(merged)
}

fn encode(vocabulary: &[AttributeValue], combo: &Combination) -> Option<Vec<AttrId>> {
    combo
        .values()
        .iter()
        .map(|a| vocabulary.binary_search(a).ok().map(|i| i as AttrId))
        .collect()
}

fn decode(vocabulary: &[AttributeValue], ids: &[AttrId]) -> Combination {
    ids.iter().map(|&id| vocabulary[id as usize].clone()).collect()
}

fn decode_all(vocabulary: &[AttributeValue], counts: &IdCounts) -> BTreeMap<Combination, u64> {
    let mut out = BTreeMap::new();
    counts.for_each(|ids, c| {
        out.insert(decode(vocabulary, ids), c);
    });
    out
}

fn selections(vocabulary: &[AttributeValue], ids: &[AttrId]) -> String {
    let mut out = String::new();
    for (i, &id) in ids.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        let a = &vocabulary[id as usize];
        out.push_str(&a.column);
        out.push(':');
        out.push_str(&a.value);
    }
    out
}

/// Raw sensitive counts of all combinations with `1 <= length <= max_length`.
#[derive(Debug, Clone)]
pub struct AggregateCounts {
    vocabulary: Arc<[AttributeValue]>,
    counts: IdCounts,
    pub record_count: u64,
    pub max_length: usize,
}

impl AggregateCounts {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Count for `combo`; zero when it never occurs (or is longer than `max_length`).
    pub fn get(&self, combo: &Combination) -> u64 {
        encode(&self.vocabulary, combo)
            .and_then(|ids| self.counts.get(&ids))
            .unwrap_or(0)
    }

    pub fn get_ids(&self, ids: &[AttrId]) -> u64 {
        self.counts.get(ids).unwrap_or(0)
    }

    pub fn id_counts(&self) -> &IdCounts {
        &self.counts
    }

    /// All counts keyed by materialized combinations.
    pub fn to_map(&self) -> BTreeMap<Combination, u64> {
        decode_all(&self.vocabulary, &self.counts)
    }
}

pub fn compute_aggregates(
    index: &AttributeIndex,
    max_length: usize,
    cap: u64,
) -> Result<AggregateCounts, CombinationError> {
    Ok(AggregateCounts {
        vocabulary: index.shared_vocabulary(),
        counts: count_id_combinations(index.records(), max_length, cap)?,
        record_count: index.total_records(),
        max_length,
    })
}

/// Nearest multiple of `precision`; exact halves round up.
pub fn round_to_precision(count: u64, precision: u64) -> u64 {
    (count + precision / 2) / precision * precision
}

/// Threshold, round, threshold again. `None` means the count is withheld.
pub fn protect_count(count: u64, threshold: u64, precision: u64) -> Option<u64> {
    if count < threshold {
        return None;
    }
    let rounded = round_to_precision(count, precision);
    (rounded >= threshold).then_some(rounded)
}

/// Releasable counts: every stored count is `>= k` and a multiple of `p`.
#[derive(Debug, Clone)]
pub struct ProtectedAggregates {
    vocabulary: Arc<[AttributeValue]>,
    counts: IdCounts,
    /// Rounded to `p` but not thresholded.
    pub protected_record_count: u64,
    pub threshold: u64,
    pub precision: u64,
    pub max_length: usize,
}

pub fn protect(agg: &AggregateCounts, threshold: u64, precision: u64) -> ProtectedAggregates {
    let counts = agg.counts.filter_map(|c| protect_count(c, threshold, precision));
    ProtectedAggregates {
        vocabulary: Arc::clone(&agg.vocabulary),
        counts,
        protected_record_count: round_to_precision(agg.record_count, precision),
        threshold,
        precision,
        max_length: agg.max_length,
    }
}

impl ProtectedAggregates {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, combo: &Combination) -> Option<u64> {
        encode(&self.vocabulary, combo).and_then(|ids| self.counts.get(&ids))
    }

    pub fn to_map(&self) -> BTreeMap<Combination, u64> {
        decode_all(&self.vocabulary, &self.counts)
    }

    /// Protected counts of single attribute values; withheld values are absent.
    pub fn singletons(&self) -> BTreeMap<AttributeValue, u64> {
        let mut out = BTreeMap::new();
        self.counts.for_each(|ids, n| {
            if let [id] = ids {
                out.insert(self.vocabulary[*id as usize].clone(), n);
            }
        });
        out
    }

    /// `(selections, count)` rows in file order: the total first, then by selections string.
    pub fn rows(&self) -> Vec<(String, u64)> {
        let mut rows: Vec<(String, u64)> = Vec::with_capacity(self.counts.len() + 1);
        self.counts
            .for_each(|ids, n| rows.push((selections(&self.vocabulary, ids), n)));
        rows.sort_unstable();
        rows.insert(0, (RECORD_COUNT_KEY.to_string(), self.protected_record_count));
        rows
    }

    /// Tab-separated release: `selections\tprotected_count` header, the
    /// `record_count` sentinel row, then one row per combination.
    pub fn write_tsv<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writeln!(writer, "selections\tprotected_count")?;
        for (selections, count) in self.rows() {
            writeln!(writer, "{selections}\t{count}")?;
        }
        writer.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SensitiveDataset;

    fn av(c: &str) -> AttributeValue {
        AttributeValue::new(c, "1")
    }

    fn index(sets: &[&[&str]]) -> AttributeIndex {
        AttributeIndex::build(&SensitiveDataset::from_attribute_sets(
            vec![],
            sets.iter().map(|s| s.iter().map(|c| av(c)).collect()),
        ))
    }

    #[test]
    fn counts_pairs_and_singles() {
        let agg = compute_aggregates(&index(&[&["A", "B"], &["A"]]), 2, 1000).unwrap();
        let expected = BTreeMap::from([
            (Combination::new([av("A")]), 2),
            (Combination::new([av("B")]), 1),
            (Combination::new([av("A"), av("B")]), 1),
        ]);
        assert_eq!(agg.to_map(), expected);
        assert_eq!(agg.record_count, 2);
    }

    #[test]
    fn empty_dataset_has_no_counts() {
        let agg = compute_aggregates(&index(&[]), 3, 1000).unwrap();
        assert!(agg.is_empty());
    }

    #[test]
    fn length_one_gives_marginals() {
        let agg = compute_aggregates(&index(&[&["A", "B", "C"], &["A", "C"]]), 1, 1000).unwrap();
        assert!(agg.to_map().keys().all(|c| c.len() == 1));
        assert_eq!(agg.len(), 3);
        assert_eq!(agg.get(&Combination::new([av("C")])), 2);
    }

    #[test]
    fn cap_propagates() {
        let names: Vec<String> = (0..30).map(|i| format!("c{i:02}")).collect();
        let row: Vec<&str> = names.iter().map(String::as_str).collect();
        let err = compute_aggregates(&index(&[&row]), 4, 1000).unwrap_err();
        assert!(matches!(err, CombinationError::EnumerationCapExceeded { .. }));
    }

    #[test]
    fn threshold_and_rounding() {
        assert_eq!(protect_count(2, 3, 5), None);
        assert_eq!(protect_count(7, 3, 5), Some(5));
        assert_eq!(protect_count(12, 3, 5), Some(10));
        assert_eq!(protect_count(8, 3, 5), Some(10));
        assert_eq!(protect_count(4, 3, 10), None);
        assert_eq!(protect_count(15, 10, 10), Some(20));
        assert_eq!(protect_count(14, 10, 10), Some(10));
        assert_eq!(protect_count(9, 1, 1), Some(9));
    }

    #[test]
    fn record_count_rounded_not_thresholded() {
        let mut agg = compute_aggregates(&index(&[]), 2, 1000).unwrap();
        agg.record_count = 4;
        let prot = protect(&agg, 10, 5);
        assert_eq!(prot.protected_record_count, 5);
    }

    #[test]
    fn tsv_layout() {
        let f = AttributeValue::new("gender", "F");
        let age = AttributeValue::new("age", "[18,30)");
        let mut sets = vec![vec![f.clone(), age.clone()]; 30];
        sets.extend(std::iter::repeat_n(vec![f], 200));
        sets.extend(std::iter::repeat_n(vec![AttributeValue::new("gender", "M")], 270));
        let idx = AttributeIndex::build(&SensitiveDataset::from_attribute_sets(vec![], sets));
        let prot = protect(&compute_aggregates(&idx, 2, 1000).unwrap(), 10, 10);
        let mut out = Vec::new();
        prot.write_tsv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "selections\tprotected_count\nrecord_count\t500\nage:[18,30)\t30\nage:[18,30);gender:F\t30\ngender:F\t230\ngender:M\t270\n"
        );
    }

    #[test]
    fn empty_release_has_total_only() {
        let prot = protect(&compute_aggregates(&index(&[]), 2, 10).unwrap(), 10, 10);
        let mut out = Vec::new();
        prot.write_tsv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "selections\tprotected_count\nrecord_count\t0\n");
    }
}
