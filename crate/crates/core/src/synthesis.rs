//! Synthetic microdata with k-synthetic anonymity: every attribute
//! combination appearing in any synthetic record occurs in at least `k`
//! sensitive records.
//!
//! Sensitive counts are anti-monotone (a superset never matches more records
//! than its subsets), so a record is safe as soon as its *full* attribute set
//! has count `>= k`. Every extension step therefore checks only the current
//! set plus the candidate; checking each subset would be redundant.
//!
//! Seeded synthesis runs six stages: sample from seeds, reconcile remaining
//! counts with the protected singletons, synthesize from positive remainders,
//! suppress negative remainders, sort, and report the synthesis ratio. The
//! rng is consumed in that order: seeds in dataset order, then stage 3, then
//! stage 4 attributes in canonical order.

use std::collections::BTreeMap;
use std::io::Write;

use num_rational::Ratio;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use crate::combinations::{AttrId, AttributeIndex, Combination};
use crate::config::SynthesisMode;
use crate::error::SynthesisError;
use crate::joint::{JointCounter, MatchSet};
use crate::ingest::{write_attribute_rows, AttributeValue, ColumnInfo, SensitiveDataset, SensitiveRecord};

/// The generator used for all synthesis randomness.
pub type SynthRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> SynthRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Signed per-attribute difference between the protected target and the
/// occurrences emitted so far.
pub type RemainingCounts = BTreeMap<AttributeValue, i64>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SyntheticRecord {
    pub attributes: Combination,
}

impl SyntheticRecord {
    pub fn new<I: IntoIterator<Item = AttributeValue>>(values: I) -> Self {
        SyntheticRecord {
            attributes: Combination::new(values),
        }
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisResult {
    pub records: Vec<SyntheticRecord>,
    /// Synthetic record count over sensitive record count (zero for an empty input).
    pub synthesis_ratio: Ratio<u64>,
    pub mode: SynthesisMode,
}

impl SynthesisResult {
    /// TSV under the selected input columns; absent columns are left empty.
    pub fn write_tsv<W: Write>(&self, writer: W, columns: &[ColumnInfo]) -> std::io::Result<()> {
        write_synthetic(&self.records, columns, writer)
    }
}

pub fn synthesis_ratio(synthetic: usize, sensitive: usize) -> Ratio<u64> {
    if sensitive == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(synthetic as u64, sensitive as u64)
    }
}

/// True iff `current` plus `candidate` occurs in at least `k` sensitive records.
pub fn can_extend(index: &AttributeIndex, current: &Combination, candidate: &AttributeValue, k: u64) -> bool {
    index.count(&current.with(candidate.clone())) >= k
}

/// Stage 1 for one seed, on attribute ids. Returns `(sampled, unsampled)`.
///
/// At each step every not-yet-sampled seed attribute that keeps the record
/// frequent is eligible and one is drawn uniformly. (The alternative reading,
/// stopping at the first drawn attribute that fails, yields shorter records.)
fn sample_seed_ids<R: Rng + ?Sized>(
    seed: &[AttrId],
    index: &AttributeIndex,
    joint: &mut JointCounter,
    k: u64,
    rng: &mut R,
) -> (Vec<AttrId>, Vec<AttrId>) {
    if index.count_ids(seed) >= k {
        return (seed.to_vec(), Vec::new());
    }
    // An attribute that fails once fails for every superset, so the pool only shrinks.
    let mut pool = seed.to_vec();
    let mut dropped = Vec::new();
    let mut sampled = Vec::new();
    let mut matches = MatchSet::All;
    loop {
        let counts = joint.counts(&matches, &pool);
        let mut i = 0;
        pool.retain(|&id| {
            let keep = counts[i] >= k;
            i += 1;
            if !keep {
                dropped.push(id);
            }
            keep
        });
        if pool.is_empty() {
            break;
        }
        let id = pool.remove(rng.gen_range(0..pool.len()));
        joint.narrow(&mut matches, id);
        sampled.push(id);
    }
    sampled.sort_unstable();
    dropped.sort_unstable();
    (sampled, dropped)
}

/// Builds one synthetic record from a sensitive seed. Returns `None` for the
/// record when no seed attribute is frequent, plus the attributes left unsampled.
pub fn sample_from_seed<R: Rng + ?Sized>(
    seed: &SensitiveRecord,
    index: &AttributeIndex,
    k: u64,
    rng: &mut R,
) -> (Option<SyntheticRecord>, Vec<AttributeValue>) {
    let ids: Option<Vec<AttrId>> = seed.attributes.iter().map(|a| index.id_of(a)).collect();
    let Some(ids) = ids else {
        // A value unknown to the index has count zero and can never be sampled.
        let (known, unknown): (Vec<_>, Vec<_>) =
            seed.attributes.iter().partition(|a| index.id_of(a).is_some());
        let known = SensitiveRecord {
            id: seed.id,
            attributes: known.into_iter().cloned().collect(),
        };
        let (record, mut unsampled) = sample_from_seed(&known, index, k, rng);
        unsampled.extend(unknown.into_iter().cloned());
        unsampled.sort();
        return (record, unsampled);
    };
    let (sampled, unsampled) = sample_seed_ids(&ids, index, &mut JointCounter::sparse(index), k, rng);
    let record = (!sampled.is_empty()).then(|| SyntheticRecord {
        attributes: index.decode(&sampled),
    });
    (record, index.decode(&unsampled).values().to_vec())
}

/// Stage 2: `remaining[a] = protected(a) - emitted(a)` over every attribute
/// that was emitted or published. Unpublished attributes have target zero.
pub fn reconcile_remaining(
    emitted: &BTreeMap<AttributeValue, u64>,
    protected_singletons: &BTreeMap<AttributeValue, u64>,
) -> RemainingCounts {
    let mut remaining = RemainingCounts::new();
    for (a, &target) in protected_singletons {
        remaining.insert(a.clone(), target as i64);
    }
    for (a, &n) in emitted {
        *remaining.entry(a.clone()).or_insert(0) -= n as i64;
    }
    remaining
}

fn synthesize_remaining_ids<R: Rng + ?Sized>(
    remaining: &mut [i64],
    joint: &mut JointCounter,
    k: u64,
    rng: &mut R,
) -> Vec<Vec<AttrId>> {
    let mut records = Vec::new();
    loop {
        let mut positive: Vec<AttrId> = (0..remaining.len() as AttrId)
            .filter(|&a| remaining[a as usize] > 0)
            .collect();
        let mut current = Vec::new();
        let mut matches = MatchSet::All;
        loop {
            let counts = joint.counts(&matches, &positive);
            let mut i = 0;
            positive.retain(|_| {
                i += 1;
                counts[i - 1] >= k
            });
            if positive.is_empty() {
                break;
            }
            let id = positive.swap_remove(rng.gen_range(0..positive.len()));
            remaining[id as usize] -= 1;
            joint.narrow(&mut matches, id);
            current.push(id);
        }
        if current.is_empty() {
            break;
        }
        current.sort_unstable();
        records.push(current);
    }
    records
}

fn remaining_to_ids(remaining: &RemainingCounts, index: &AttributeIndex) -> Vec<i64> {
    let mut by_id = vec![0i64; index.vocabulary().len()];
    for (a, &r) in remaining {
        if let Some(id) = index.id_of(a) {
            by_id[id as usize] = r;
        }
    }
    by_id
}

fn write_back_remaining(by_id: &[i64], index: &AttributeIndex, remaining: &mut RemainingCounts) {
    for (id, &r) in by_id.iter().enumerate() {
        let a = index.attribute(id as AttrId);
        if let Some(slot) = remaining.get_mut(a) {
            *slot = r;
        } else if r != 0 {
            remaining.insert(a.clone(), r);
        }
    }
}

/// Stage 3: builds records from attributes with positive remaining counts,
/// decrementing them as they are used, and starts a new record whenever no
/// remaining attribute can extend the current one. Stops when no positive
/// attribute can start a record.
pub fn synthesize_from_remaining<R: Rng + ?Sized>(
    remaining: &mut RemainingCounts,
    index: &AttributeIndex,
    k: u64,
    rng: &mut R,
) -> Vec<SyntheticRecord> {
    let mut by_id = remaining_to_ids(remaining, index);
    let records = synthesize_remaining_ids(&mut by_id, &mut JointCounter::new(index), k, rng);
    write_back_remaining(&by_id, index, remaining);
    records
        .iter()
        .map(|ids| SyntheticRecord {
            attributes: index.decode(ids),
        })
        .collect()
}

/// Stage 4 on ids: for each attribute with remaining `-e`, removes it from `e`
/// records drawn uniformly among all records holding it. Emptied records are dropped.
fn suppress_excess_ids<R: Rng + ?Sized>(
    mut records: Vec<Vec<AttrId>>,
    remaining: &mut [i64],
    index: &AttributeIndex,
    rng: &mut R,
) -> Result<Vec<Vec<AttrId>>, SynthesisError> {
    for (a, slot) in remaining.iter_mut().enumerate() {
        if *slot >= 0 {
            continue;
        }
        let excess = slot.unsigned_abs();
        let id = a as AttrId;
        let holders: Vec<usize> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.binary_search(&id).is_ok())
            .map(|(i, _)| i)
            .collect();
        if (holders.len() as u64) < excess {
            return Err(SynthesisError::InsufficientHolders {
                attribute: index.attribute(id).to_string(),
                needed: excess,
                available: holders.len(),
            });
        }
        for pick in rand::seq::index::sample(rng, holders.len(), excess as usize) {
            let record = &mut records[holders[pick]];
            let pos = record.binary_search(&id).expect("holder contains attribute");
            record.remove(pos);
        }
        *slot = 0;
    }
    records.retain(|r| !r.is_empty());
    Ok(records)
}

/// Stage 4: randomly suppresses attributes with negative remaining counts.
/// Attributes are processed in canonical order.
pub fn suppress_excess<R: Rng + ?Sized>(
    records: Vec<SyntheticRecord>,
    remaining: &RemainingCounts,
    rng: &mut R,
) -> Result<Vec<SyntheticRecord>, SynthesisError> {
    let mut records: Vec<Vec<AttributeValue>> =
        records.into_iter().map(|r| r.attributes.values().to_vec()).collect();
    for (a, &r) in remaining {
        if r >= 0 {
            continue;
        }
        let excess = r.unsigned_abs();
        let holders: Vec<usize> = records
            .iter()
            .enumerate()
            .filter(|(_, rec)| rec.binary_search(a).is_ok())
            .map(|(i, _)| i)
            .collect();
        if (holders.len() as u64) < excess {
            return Err(SynthesisError::InsufficientHolders {
                attribute: a.to_string(),
                needed: excess,
                available: holders.len(),
            });
        }
        for pick in rand::seq::index::sample(rng, holders.len(), excess as usize) {
            let record = &mut records[holders[pick]];
            let pos = record.binary_search(a).expect("holder contains attribute");
            record.remove(pos);
        }
    }
    Ok(records
        .into_iter()
        .filter(|r| !r.is_empty())
        .map(SyntheticRecord::new)
        .collect())
}

/// Stage 5: stable sort by canonical serialization, then by length.
pub fn sort_records(records: Vec<SyntheticRecord>) -> Vec<SyntheticRecord> {
    let mut keyed: Vec<(String, usize, SyntheticRecord)> = records
        .into_iter()
        .map(|r| (r.attributes.selections(), r.len(), r))
        .collect();
    keyed.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    keyed.into_iter().map(|(_, _, r)| r).collect()
}

/// Protected singleton targets indexed by attribute id.
fn targets_by_id(index: &AttributeIndex, protected_singletons: &BTreeMap<AttributeValue, u64>) -> Vec<u64> {
    let mut targets = vec![0u64; index.vocabulary().len()];
    for (a, &n) in protected_singletons {
        if let Some(id) = index.id_of(a) {
            targets[id as usize] = n;
        }
    }
    targets
}

fn finish(
    records: Vec<Vec<AttrId>>,
    index: &AttributeIndex,
    sensitive_len: usize,
    mode: SynthesisMode,
) -> SynthesisResult {
    let records = sort_records(
        records
            .iter()
            .map(|ids| SyntheticRecord {
                attributes: index.decode(ids),
            })
            .collect(),
    );
    SynthesisResult {
        synthesis_ratio: synthesis_ratio(records.len(), sensitive_len),
        records,
        mode,
    }
}

/// Six-stage seeded synthesis over every sensitive record.
pub fn synthesize_seeded<R: Rng + ?Sized>(
    dataset: &SensitiveDataset,
    index: &AttributeIndex,
    protected_singletons: &BTreeMap<AttributeValue, u64>,
    k: u64,
    rng: &mut R,
) -> Result<SynthesisResult, SynthesisError> {
    let vocab = index.vocabulary().len();

    // 1. sample from seeds
    let mut joint = JointCounter::new(index);
    let mut emitted = vec![0u64; vocab];
    let mut records = Vec::with_capacity(dataset.len());
    for record_id in 0..dataset.len() {
        let (sampled, _unsampled) = sample_seed_ids(index.record(record_id), index, &mut joint, k, rng);
        if sampled.is_empty() {
            continue;
        }
        for &a in &sampled {
            emitted[a as usize] += 1;
        }
        records.push(sampled);
    }

    // 2. reconcile with protected targets
    let targets = targets_by_id(index, protected_singletons);
    let mut remaining: Vec<i64> = targets
        .iter()
        .zip(&emitted)
        .map(|(&t, &e)| t as i64 - e as i64)
        .collect();

    // 3. synthesize from positive remainders
    records.extend(synthesize_remaining_ids(&mut remaining, &mut joint, k, rng));

    // 4. suppress negative remainders across all records
    let records = suppress_excess_ids(records, &mut remaining, index, rng)?;

    // 5-6. sort and ratio
    Ok(finish(records, index, dataset.len(), SynthesisMode::Seeded))
}

/// Unseeded synthesis: records grow by sampling an attribute with probability
/// proportional to its joint sensitive count with the current set, among
/// attributes that keep the record frequent and have not yet reached their
/// protected target.
pub fn synthesize_unseeded<R: Rng + ?Sized>(
    dataset: &SensitiveDataset,
    index: &AttributeIndex,
    protected_singletons: &BTreeMap<AttributeValue, u64>,
    k: u64,
    rng: &mut R,
) -> Result<SynthesisResult, SynthesisError> {
    let targets = targets_by_id(index, protected_singletons);
    let mut emitted = vec![0u64; targets.len()];
    let mut records = Vec::new();
    let mut weights: Vec<u64> = Vec::new();
    let mut joint = JointCounter::new(index);
    loop {
        let mut current: Vec<AttrId> = Vec::new();
        let mut matches = MatchSet::All;
        let mut candidates: Vec<AttrId> = (0..targets.len() as AttrId)
            .filter(|&a| emitted[a as usize] < targets[a as usize])
            .collect();
        loop {
            weights.clear();
            let counts = joint.counts(&matches, &candidates);
            let mut i = 0;
            candidates.retain(|_| {
                let c = counts[i];
                i += 1;
                if c >= k {
                    weights.push(c);
                }
                c >= k
            });
            if candidates.is_empty() {
                break;
            }
            let dist = WeightedIndex::new(&weights).expect("positive weights");
            let a = candidates.remove(dist.sample(rng));
            emitted[a as usize] += 1;
            joint.narrow(&mut matches, a);
            current.push(a);
        }
        if current.is_empty() {
            break;
        }
        current.sort_unstable();
        records.push(current);
    }

    let mut remaining: Vec<i64> = targets
        .iter()
        .zip(&emitted)
        .map(|(&t, &e)| t as i64 - e as i64)
        .collect();
    let records = suppress_excess_ids(records, &mut remaining, index, rng)?;
    Ok(finish(records, index, dataset.len(), SynthesisMode::Unseeded))
}

pub fn synthesize<R: Rng + ?Sized>(
    mode: SynthesisMode,
    dataset: &SensitiveDataset,
    index: &AttributeIndex,
    protected_singletons: &BTreeMap<AttributeValue, u64>,
    k: u64,
    rng: &mut R,
) -> Result<SynthesisResult, SynthesisError> {
    match mode {
        SynthesisMode::Seeded => synthesize_seeded(dataset, index, protected_singletons, k, rng),
        SynthesisMode::Unseeded => synthesize_unseeded(dataset, index, protected_singletons, k, rng),
    }
}

/// Writes synthetic records as TSV under `columns`, in the given order.
pub fn write_synthetic<W: Write>(
    records: &[SyntheticRecord],
    columns: &[ColumnInfo],
    writer: W,
) -> std::io::Result<()> {
    write_attribute_rows(
        writer,
        b'\t',
        columns,
        records.iter().map(|r| r.attributes.values()),
    )
}

/// Occurrences of each attribute value across `records`.
pub fn attribute_totals<'a, I>(records: I) -> BTreeMap<AttributeValue, u64>
where
    I: IntoIterator<Item = &'a SyntheticRecord>,
{
    let mut totals = BTreeMap::new();
    for r in records {
        for a in r.attributes.values() {
            *totals.entry(a.clone()).or_insert(0) += 1;
        }
    }
    totals
}
