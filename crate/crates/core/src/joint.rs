//! Incremental joint counting for growing records one attribute at a time.
//!
//! A [`MatchSet`] holds the sensitive records matching the set under
//! construction. [`JointCounter::counts`] returns `count(current + a)` for a
//! batch of candidates `a`, either by intersecting postings or, when the
//! match set is small, by tallying the attributes of its records.

use roaring::RoaringBitmap;

use crate::combinations::{AttrId, AttributeIndex};

/// Upper bound on dense posting storage, in 64-bit words (256 MiB).
const DENSE_LIMIT_WORDS: usize = 32 << 20;

/// Records matching the set under construction.
#[derive(Debug, Clone)]
pub(crate) enum MatchSet {
    All,
    Dense { bits: Vec<u64>, len: u64 },
    Sparse(RoaringBitmap),
}

struct DensePostings {
    words: usize,
    bits: Vec<u64>,
}

impl DensePostings {
    fn build(index: &AttributeIndex) -> Option<Self> {
        let words = (index.total_records() as usize).div_ceil(64);
        let vocab = index.vocabulary().len();
        if words == 0 || words.checked_mul(vocab)? > DENSE_LIMIT_WORDS {
            return None;
        }
        let mut bits = vec![0u64; words * vocab];
        for id in 0..vocab {
            let row = &mut bits[id * words..(id + 1) * words];
            for r in index.posting(id as AttrId) {
                row[r as usize / 64] |= 1 << (r % 64);
            }
        }
        Some(DensePostings { words, bits })
    }

    fn row(&self, id: AttrId) -> &[u64] {
        let start = id as usize * self.words;
        &self.bits[start..start + self.words]
    }
}

pub(crate) struct JointCounter<'a> {
    index: &'a AttributeIndex,
    dense: Option<DensePostings>,
    tally: Vec<u64>,
    counts: Vec<u64>,
    mean_record_len: usize,
}

impl<'a> JointCounter<'a> {
    /// Counter with dense postings when they fit in memory.
    pub(crate) fn new(index: &'a AttributeIndex) -> Self {
        let mut counter = Self::sparse(index);
        counter.dense = DensePostings::build(index);
        counter
    }

    /// Counter that only uses the index's compressed postings.
    pub(crate) fn sparse(index: &'a AttributeIndex) -> Self {
        let total: usize = index.records().iter().map(Vec::len).sum();
        JointCounter {
            index,
            dense: None,
            tally: vec![0; index.vocabulary().len()],
            counts: Vec::new(),
            mean_record_len: total / index.records().len().max(1) + 1,
        }
    }

    /// Restricts `matches` to records holding `id`.
    pub(crate) fn narrow(&self, matches: &mut MatchSet, id: AttrId) {
        let posting = self.index.posting(id);
        match matches {
            MatchSet::All => {
                *matches = match &self.dense {
                    Some(d) => MatchSet::Dense {
                        bits: d.row(id).to_vec(),
                        len: posting.len(),
                    },
                    None => MatchSet::Sparse(posting.clone()),
                }
            }
            MatchSet::Dense { bits, len } => {
                let row = self.dense.as_ref().expect("dense match set needs dense postings").row(id);
                let mut n = 0;
                for (w, p) in bits.iter_mut().zip(row) {
                    *w &= p;
                    n += w.count_ones() as u64;
                }
                *len = n;
            }
            MatchSet::Sparse(m) => *m &= posting,
        }
    }

    /// `count(current + a)` for each candidate `a`, in candidate order.
    pub(crate) fn counts(&mut self, matches: &MatchSet, candidates: &[AttrId]) -> &[u64] {
        self.counts.clear();
        match matches {
            MatchSet::All => {
                let index = self.index;
                self.counts.extend(candidates.iter().map(|&a| index.posting(a).len()));
            }
            MatchSet::Dense { bits, len } => {
                if self.tally_is_cheaper(*len, candidates.len(), bits.len()) {
                    self.tally_with(candidates, |f| for_each_dense(bits, f));
                } else {
                    let dense = self.dense.as_ref().expect("dense match set needs dense postings");
                    self.counts.extend(candidates.iter().map(|&a| {
                        bits.iter()
                            .zip(dense.row(a))
                            .map(|(w, p)| (w & p).count_ones() as u64)
                            .sum::<u64>()
                    }));
                }
            }
            MatchSet::Sparse(m) => {
                if self.tally_is_cheaper(m.len(), candidates.len(), (m.len() as usize).min(4096)) {
                    self.tally_with(candidates, |f| m.iter().for_each(f));
                } else {
                    let index = self.index;
                    self.counts
                        .extend(candidates.iter().map(|&a| m.intersection_len(index.posting(a))));
                }
            }
        }
        &self.counts
    }

    fn tally_is_cheaper(&self, matched: u64, candidates: usize, per_candidate: usize) -> bool {
        (matched as usize).saturating_mul(self.mean_record_len * 2) < candidates.saturating_mul(per_candidate)
    }

    fn tally_with<I: Fn(&mut dyn FnMut(u32))>(&mut self, candidates: &[AttrId], records: I) {
        let index = self.index;
        let tally = &mut self.tally;
        records(&mut |r| {
            for &a in index.record(r as usize) {
                tally[a as usize] += 1;
            }
        });
        self.counts.extend(candidates.iter().map(|&a| tally[a as usize]));
        records(&mut |r| {
            for &a in index.record(r as usize) {
                tally[a as usize] = 0;
            }
        });
    }
}

fn for_each_dense(bits: &[u64], f: &mut dyn FnMut(u32)) {
    for (i, &word) in bits.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            let t = w.trailing_zeros();
            f(i as u32 * 64 + t);
            w &= w - 1;
        }
    }
}
