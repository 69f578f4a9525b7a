//! Counting engine: canonical attribute combinations, an inverted index over
//! attribute values, and bounded subset enumeration.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use roaring::RoaringBitmap;
use serde::{Deserialize, Serialize};

use crate::error::CombinationError;
use crate::ingest::{AttributeValue, SensitiveDataset};

/// Dense id of an attribute value inside an [`AttributeIndex`]. Ids follow
/// the canonical `(column, value)` order, so sorted id lists are canonical.
pub type AttrId = u32;

/// A set of attribute values in canonical order. The empty combination
/// means "no filter".
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Combination(Vec<AttributeValue>);

impl Combination {
    pub fn new<I: IntoIterator<Item = AttributeValue>>(values: I) -> Self {
        let mut v: Vec<_> = values.into_iter().collect();
        v.sort();
        v.dedup();
        Combination(v)
    }

    pub fn empty() -> Self {
        Combination(Vec::new())
    }

    pub fn values(&self) -> &[AttributeValue] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, value: &AttributeValue) -> bool {
        self.0.binary_search(value).is_ok()
    }

    pub fn with(&self, value: AttributeValue) -> Combination {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&value) {
            v.insert(pos, value);
        }
        Combination(v)
    }

    pub fn is_subset_of(&self, other: &[AttributeValue]) -> bool {
        self.0.iter().all(|a| other.binary_search(a).is_ok())
    }

    /// `column:value` pairs joined by `;`.
    pub fn selections(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromIterator<AttributeValue> for Combination {
    fn from_iter<I: IntoIterator<Item = AttributeValue>>(iter: I) -> Self {
        Combination::new(iter)
    }
}

/// Inverted index from attribute value to the ids of records holding it.
#[derive(Debug, Clone)]
pub struct AttributeIndex {
    vocabulary: Arc<[AttributeValue]>,
    lookup: HashMap<AttributeValue, AttrId>,
    postings: Vec<RoaringBitmap>,
    records: Vec<Vec<AttrId>>,
    total_records: u32,
}

impl AttributeIndex {
    pub fn build(dataset: &SensitiveDataset) -> Self {
        let mut vocabulary: Vec<AttributeValue> = dataset
            .records()
            .iter()
            .flat_map(|r| r.attributes.iter().cloned())
            .collect();
        vocabulary.sort();
        vocabulary.dedup();
        let lookup: HashMap<AttributeValue, AttrId> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i as AttrId))
            .collect();

        let mut postings = vec![RoaringBitmap::new(); vocabulary.len()];
        let mut records = Vec::with_capacity(dataset.len());
        for record in dataset.records() {
            let mut ids: Vec<AttrId> = record.attributes.iter().map(|a| lookup[a]).collect();
            ids.sort_unstable();
            ids.dedup();
            for &id in &ids {
                postings[id as usize].insert(record.id as u32);
            }
            records.push(ids);
        }
        AttributeIndex {
            vocabulary: vocabulary.into(),
            lookup,
            postings,
            records,
            total_records: dataset.len() as u32,
        }
    }

    pub fn total_records(&self) -> u64 {
        u64::from(self.total_records)
    }

    /// All distinct attribute values, in canonical order.
    pub fn vocabulary(&self) -> &[AttributeValue] {
        &self.vocabulary
    }

    /// Shared handle to the vocabulary, for structures keyed by attribute ids.
    pub fn shared_vocabulary(&self) -> Arc<[AttributeValue]> {
        Arc::clone(&self.vocabulary)
    }

    pub fn attribute(&self, id: AttrId) -> &AttributeValue {
        &self.vocabulary[id as usize]
    }

    pub fn id_of(&self, value: &AttributeValue) -> Option<AttrId> {
        self.lookup.get(value).copied()
    }

    pub fn posting(&self, id: AttrId) -> &RoaringBitmap {
        &self.postings[id as usize]
    }

    /// Sorted attribute ids of record `record_id`.
    pub fn record(&self, record_id: usize) -> &[AttrId] {
        &self.records[record_id]
    }

    pub fn records(&self) -> &[Vec<AttrId>] {
        &self.records
    }

    pub fn all_ids(&self) -> RoaringBitmap {
        let mut all = RoaringBitmap::new();
        all.insert_range(0..self.total_records);
        all
    }

    /// Ids for every value of `combo`, or `None` if any value is unknown.
    pub fn encode(&self, combo: &Combination) -> Option<Vec<AttrId>> {
        combo.values().iter().map(|a| self.id_of(a)).collect()
    }

    pub fn decode(&self, ids: &[AttrId]) -> Combination {
        Combination(ids.iter().map(|&id| self.attribute(id).clone()).collect())
    }

    /// Number of records holding every value in `combo`.
    pub fn count(&self, combo: &Combination) -> u64 {
        match self.encode(combo) {
            Some(ids) => self.count_ids(&ids),
            None => 0,
        }
    }

    pub fn count_ids(&self, ids: &[AttrId]) -> u64 {
        match ids {
            [] => self.total_records(),
            [a] => self.posting(*a).len(),
            [a, b] => self.posting(*a).intersection_len(self.posting(*b)),
            _ => self.matching_id_set(ids).len(),
        }
    }

    /// Records holding every value in `combo`.
    pub fn matching_ids(&self, combo: &Combination) -> RoaringBitmap {
        match self.encode(combo) {
            Some(ids) => self.matching_id_set(&ids),
            None => RoaringBitmap::new(),
        }
    }

    /// Intersection of postings, smallest posting first.
    pub fn matching_id_set(&self, ids: &[AttrId]) -> RoaringBitmap {
        if ids.is_empty() {
            return self.all_ids();
        }
        let mut order: Vec<&RoaringBitmap> = ids.iter().map(|&id| self.posting(id)).collect();
        order.sort_by_key(|p| p.len());
        let mut acc = order[0].clone();
        for p in &order[1..] {
            if acc.is_empty() {
                break;
            }
            acc &= *p;
        }
        acc
    }
}

/// Number of non-empty subsets of an `n`-set with at most `max_length` members.
pub fn subset_count(n: usize, max_length: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for i in 1..=max_length.min(n) {
        binom = binom * (n - i + 1) as u128 / i as u128;
        total += binom;
    }
    total
}

/// Fails when enumerating a record of `attributes` values would exceed `cap`.
pub fn check_enumeration_cap(
    record: usize,
    attributes: usize,
    max_length: usize,
    cap: u64,
) -> Result<(), CombinationError> {
    let combinations = subset_count(attributes, max_length);
    if combinations > u128::from(cap) {
        return Err(CombinationError::EnumerationCapExceeded {
            record,
            attributes,
            max_length,
            combinations,
            cap,
        });
    }
    Ok(())
}

/// Index-combination walk over `n` positions: all size-1 subsets, then
/// size-2, and so on up to `max_length`, each in lexicographic index order.
#[derive(Debug, Clone)]
struct IndexWalk {
    n: usize,
    max: usize,
    indices: Vec<usize>,
    started: bool,
}

impl IndexWalk {
    fn new(n: usize, max_length: usize) -> Self {
        IndexWalk {
            n,
            max: max_length.min(n),
            indices: Vec::new(),
            started: false,
        }
    }

    fn advance(&mut self) -> Option<&[usize]> {
        if !self.started {
            self.started = true;
            if self.max == 0 {
                return None;
            }
            self.indices = vec![0];
            return Some(&self.indices);
        }
        let r = self.indices.len();
        if r == 0 {
            return None;
        }
        let n = self.n;
        if let Some(i) = (0..r).rev().find(|&i| self.indices[i] < n - r + i) {
            self.indices[i] += 1;
            for j in i + 1..r {
                self.indices[j] = self.indices[j - 1] + 1;
            }
            return Some(&self.indices);
        }
        if r < self.max {
            self.indices = (0..=r).collect();
            Some(&self.indices)
        } else {
            self.indices.clear();
            None
        }
    }
}

/// Iterator over the non-empty subsets of `items` with at most `max_length`
/// members, ordered by length and then lexicographically by position.
#[derive(Debug, Clone)]
pub struct Subsets<'a, T> {
    items: &'a [T],
    walk: IndexWalk,
}

impl<T: Clone> Iterator for Subsets<'_, T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        let items = self.items;
        self.walk
            .advance()
            .map(|idx| idx.iter().map(|&i| items[i].clone()).collect())
    }
}

/// Subsets of a canonically ordered record; each yielded subset is itself canonical.
pub fn enumerate_subsets<T: Clone>(record: &[T], max_length: usize) -> Subsets<'_, T> {
    Subsets {
        items: record,
        walk: IndexWalk::new(record.len(), max_length),
    }
}

/// Allocation-free variant of [`enumerate_subsets`] that lends each subset to `f`.
pub fn for_each_subset<T: Copy, F: FnMut(&[T])>(record: &[T], max_length: usize, mut f: F) {
    let mut walk = IndexWalk::new(record.len(), max_length);
    let mut buf = Vec::with_capacity(walk.max);
    while let Some(idx) = walk.advance() {
        buf.clear();
        buf.extend(idx.iter().map(|&i| record[i]));
        f(&buf);
    }
}
