//! Rarity, leakage and preservation summaries.
//!
//! Tables are generic over the float type used for proportions and means;
//! see the `Evaluation*` aliases at the crate root for the concrete `f64` forms.

mod svg;

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Display};
use std::io::Write;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use num_traits::Float;

use crate::aggregates::{count_id_combinations, AggregateCounts};
use crate::combinations::{AttrId, AttributeIndex};
use crate::error::{CombinationError, EvaluationError};
use crate::synthesis::SyntheticRecord;

pub const RARE_BY_LENGTH: &str = "sensitive_rare_by_length";
pub const LEAKAGE_BY_LENGTH: &str = "synthetic_leakage_by_length";
pub const PRESERVATION_BY_LENGTH: &str = "synthetic_preservation_by_length";
pub const PRESERVATION_BY_COUNT: &str = "synthetic_preservation_by_count";

/// First bin upper bound; later bins double.
pub const COUNT_BIN_ANCHOR: u64 = 10;

fn cast<F: Float>(x: u64) -> F {
    F::from(x).expect("count representable as float")
}

fn proportion<F: Float>(part: u64, whole: u64) -> F {
    if whole == 0 {
        F::zero()
    } else {
        cast::<F>(part) / cast::<F>(whole)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RareRow<F> {
    pub length: usize,
    pub combo_count: u64,
    pub rare_count: u64,
    pub rare_proportion: F,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageRow<F> {
    pub length: usize,
    pub combo_count: u64,
    pub leak_count: u64,
    pub leak_proportion: F,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreservationByLengthRow<F> {
    pub length: usize,
    pub mean_filtered_count: F,
    /// Mean of `min(1, synthetic / sensitive)`.
    pub mean_preservation: F,
    /// Mean of the uncapped ratio.
    pub mean_raw_ratio: F,
}

/// Half-open count interval `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountBin {
    pub lo: u64,
    pub hi: u64,
}

impl CountBin {
    /// Geometric bins `(0,10], (10,20], (20,40], ...`.
    pub fn containing(count: u64) -> CountBin {
        let mut lo = 0;
        let mut hi = COUNT_BIN_ANCHOR;
        while count > hi {
            lo = hi;
            hi *= 2;
        }
        CountBin { lo, hi }
    }
}

impl Display for CountBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreservationByCountRow<F> {
    pub bin: CountBin,
    pub mean_combo_length: F,
    pub mean_preservation: F,
    pub mean_raw_ratio: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSummary<F> {
    pub rare_by_length: Vec<RareRow<F>>,
    pub leakage_by_length: Vec<LeakageRow<F>>,
    pub preservation_by_length: Vec<PreservationByLengthRow<F>>,
    pub preservation_by_count: Vec<PreservationByCountRow<F>>,
    pub synthesis_ratio: Ratio<u64>,
}

/// One distinct combination of the synthetic data with its two counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CombinationStat {
    pub length: usize,
    pub synthetic_count: u64,
    pub sensitive_count: u64,
}

/// Counts every distinct combination (length `<= max_length`) occurring in
/// the synthetic records, paired with its sensitive count. Values unknown to
/// the sensitive index have sensitive count zero.
pub fn synthetic_combination_stats(
    index: &AttributeIndex,
    synthetic: &[SyntheticRecord],
    max_length: usize,
    cap: u64,
) -> Result<Vec<CombinationStat>, CombinationError> {
    combination_stats_with(index, synthetic, max_length, cap, |ids| index.count_ids(ids))
}

fn combination_stats_with<L: Fn(&[AttrId]) -> u64>(
    index: &AttributeIndex,
    synthetic: &[SyntheticRecord],
    max_length: usize,
    cap: u64,
    sensitive_count: L,
) -> Result<Vec<CombinationStat>, CombinationError> {
    let known = index.vocabulary().len() as AttrId;
    let mut unknown: HashMap<&crate::ingest::AttributeValue, AttrId> = HashMap::new();
    let encoded: Vec<Vec<AttrId>> = synthetic
        .iter()
        .map(|r| {
            let mut ids: Vec<AttrId> = r
                .attributes
                .values()
                .iter()
                .map(|a| {
                    index.id_of(a).unwrap_or_else(|| {
                        let next = known + unknown.len() as AttrId;
                        *unknown.entry(a).or_insert(next)
                    })
                })
                .collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    let counts = count_id_combinations(&encoded, max_length, cap)?;
    let mut stats: Vec<CombinationStat> = Vec::with_capacity(counts.len());
    counts.for_each(|ids, synthetic_count| {
        stats.push(CombinationStat {
            length: ids.len(),
            synthetic_count,
            sensitive_count: if ids.iter().any(|&id| id >= known) {
                0
            } else {
                sensitive_count(ids)
            },
        })
    });
    stats.sort_unstable_by_key(|s| (s.length, s.synthetic_count, s.sensitive_count));
    Ok(stats)
}

/// Per length `1..=max_length`: distinct sensitive combinations and those with count `< k`.
pub fn rare_by_length<F: Float>(sensitive: &AggregateCounts, k: u64, max_length: usize) -> Vec<RareRow<F>> {
    let mut combos = vec![0u64; max_length + 1];
    let mut rare = vec![0u64; max_length + 1];
    sensitive.id_counts().for_each(|ids, count| {
        let len = ids.len();
        if len == 0 || len > max_length {
            return;
        }
        combos[len] += 1;
        if count < k {
            rare[len] += 1;
        }
    });
    (1..=max_length)
        .map(|length| RareRow {
            length,
            combo_count: combos[length],
            rare_count: rare[length],
            rare_proportion: proportion(rare[length], combos[length]),
        })
        .collect()
}

/// Per length `1..=max_length`: distinct synthetic combinations and those rare in the sensitive data.
pub fn leakage_by_length<F: Float>(stats: &[CombinationStat], k: u64, max_length: usize) -> Vec<LeakageRow<F>> {
    let mut combos = vec![0u64; max_length + 1];
    let mut leaks = vec![0u64; max_length + 1];
    for s in stats.iter().filter(|s| s.length <= max_length) {
        combos[s.length] += 1;
        if s.sensitive_count < k {
            leaks[s.length] += 1;
        }
    }
    (1..=max_length)
        .map(|length| LeakageRow {
            length,
            combo_count: combos[length],
            leak_count: leaks[length],
            leak_proportion: proportion(leaks[length], combos[length]),
        })
        .collect()
}

fn ratios<F: Float>(s: &CombinationStat) -> Result<(F, F), EvaluationError> {
    if s.sensitive_count == 0 {
        return Err(EvaluationError::MissingSensitiveCount(format!(
            "of length {} (synthetic count {})",
            s.length, s.synthetic_count
        )));
    }
    let raw = cast::<F>(s.synthetic_count) / cast::<F>(s.sensitive_count);
    Ok((raw.min(F::one()), raw))
}

struct MeanAcc<F> {
    n: u64,
    a: F,
    b: F,
    c: F,
}

impl<F: Float> MeanAcc<F> {
    fn push(&mut self, a: F, b: F, c: F) {
        self.n += 1;
        self.a = self.a + a;
        self.b = self.b + b;
        self.c = self.c + c;
    }

    fn means(&self) -> (F, F, F) {
        let n = cast::<F>(self.n);
        (self.a / n, self.b / n, self.c / n)
    }
}

fn zero_acc<F: Float>() -> MeanAcc<F> {
    MeanAcc {
        n: 0,
        a: F::zero(),
        b: F::zero(),
        c: F::zero(),
    }
}

/// Unweighted means over distinct synthetic combinations, per length present.
/// A combination with no sensitive count is a leak and aborts.
pub fn preservation_by_length<F: Float>(
    stats: &[CombinationStat],
    max_length: usize,
) -> Result<Vec<PreservationByLengthRow<F>>, EvaluationError> {
    let mut acc: BTreeMap<usize, MeanAcc<F>> = BTreeMap::new();
    for s in stats.iter().filter(|s| s.length <= max_length) {
        let (capped, raw) = ratios::<F>(s)?;
        acc.entry(s.length)
            .or_insert_with(zero_acc)
            .push(cast(s.synthetic_count), capped, raw);
    }
    Ok(acc
        .into_iter()
        .map(|(length, m)| {
            let (mean_filtered_count, mean_preservation, mean_raw_ratio) = m.means();
            PreservationByLengthRow {
                length,
                mean_filtered_count,
                mean_preservation,
                mean_raw_ratio,
            }
        })
        .collect())
}

/// Unweighted means per populated synthetic-count bin, in bin order.
pub fn preservation_by_count<F: Float>(
    stats: &[CombinationStat],
    max_length: usize,
) -> Result<Vec<PreservationByCountRow<F>>, EvaluationError> {
    let mut acc: BTreeMap<CountBin, MeanAcc<F>> = BTreeMap::new();
    for s in stats.iter().filter(|s| s.length <= max_length) {
        let (capped, raw) = ratios::<F>(s)?;
        acc.entry(CountBin::containing(s.synthetic_count))
            .or_insert_with(zero_acc)
            .push(cast(s.length as u64), capped, raw);
    }
    Ok(acc
        .into_iter()
        .map(|(bin, m)| {
            let (mean_combo_length, mean_preservation, mean_raw_ratio) = m.means();
            PreservationByCountRow {
                bin,
                mean_combo_length,
                mean_preservation,
                mean_raw_ratio,
            }
        })
        .collect())
}

/// All four tables for one synthetic dataset against its sensitive source.
pub fn evaluate<F: Float>(
    index: &AttributeIndex,
    sensitive: &AggregateCounts,
    synthetic: &[SyntheticRecord],
    k: u64,
    max_length: usize,
    cap: u64,
) -> Result<EvaluationSummary<F>, EvaluationError> {
    let stats = if sensitive.max_length >= max_length {
        combination_stats_with(index, synthetic, max_length, cap, |ids| sensitive.get_ids(ids))?
    } else {
        synthetic_combination_stats(index, synthetic, max_length, cap)?
    };
    let leakage_by_length = leakage_by_length(&stats, k, max_length);
    // Preservation is undefined for combinations absent from the sensitive data.
    let leak_free: Vec<CombinationStat> = stats.iter().copied().filter(|s| s.sensitive_count > 0).collect();
    if leak_free.len() < stats.len() {
        log::warn!(
            "{} synthetic combinations never occur in the sensitive data; excluded from preservation tables",
            stats.len() - leak_free.len()
        );
    }
    Ok(EvaluationSummary {
        rare_by_length: rare_by_length(sensitive, k, max_length),
        leakage_by_length,
        preservation_by_length: preservation_by_length(&leak_free, max_length)?,
        preservation_by_count: preservation_by_count(&leak_free, max_length)?,
        synthesis_ratio: crate::synthesis::synthesis_ratio(synthetic.len(), index.total_records() as usize),
    })
}

impl<F: Float + Display> EvaluationSummary<F> {
    pub fn total_leaks(&self) -> u64 {
        self.leakage_by_length.iter().map(|r| r.leak_count).sum()
    }

    pub fn write_rare_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "length\tcombo_count\trare_count\trare_proportion")?;
        for r in &self.rare_by_length {
            writeln!(w, "{}\t{}\t{}\t{:.6}", r.length, r.combo_count, r.rare_count, r.rare_proportion)?;
        }
        w.flush()
    }

    pub fn write_leakage_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "length\tcombo_count\tleak_count\tleak_proportion")?;
        for r in &self.leakage_by_length {
            writeln!(w, "{}\t{}\t{}\t{:.6}", r.length, r.combo_count, r.leak_count, r.leak_proportion)?;
        }
        w.flush()
    }

    pub fn write_preservation_by_length_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "length\tmean_filtered_count\tmean_preservation\tmean_raw_ratio")?;
        for r in &self.preservation_by_length {
            writeln!(
                w,
                "{}\t{:.6}\t{:.6}\t{:.6}",
                r.length, r.mean_filtered_count, r.mean_preservation, r.mean_raw_ratio
            )?;
        }
        w.flush()
    }

    pub fn write_preservation_by_count_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "count_bin_label\tmean_combo_length\tmean_preservation\tmean_raw_ratio")?;
        for r in &self.preservation_by_count {
            writeln!(
                w,
                "{}\t{:.6}\t{:.6}\t{:.6}",
                r.bin, r.mean_combo_length, r.mean_preservation, r.mean_raw_ratio
            )?;
        }
        w.flush()
    }

    fn charts(&self) -> [svg::Chart; 4] {
        let f = |x: F| x.to_f64().unwrap_or(0.0);
        [
            svg::Chart {
                title: "Sensitive combinations by length".into(),
                x_label: "combination length".into(),
                categories: self.rare_by_length.iter().map(|r| r.length.to_string()).collect(),
                series: vec![
                    ("combinations".into(), self.rare_by_length.iter().map(|r| r.combo_count as f64).collect()),
                    ("rare".into(), self.rare_by_length.iter().map(|r| r.rare_count as f64).collect()),
                ],
            },
            svg::Chart {
                title: "Synthetic combinations by length".into(),
                x_label: "combination length".into(),
                categories: self.leakage_by_length.iter().map(|r| r.length.to_string()).collect(),
                series: vec![
                    ("combinations".into(), self.leakage_by_length.iter().map(|r| r.combo_count as f64).collect()),
                    ("leaked".into(), self.leakage_by_length.iter().map(|r| r.leak_count as f64).collect()),
                ],
            },
            svg::Chart {
                title: "Mean preservation by combination length".into(),
                x_label: "combination length".into(),
                categories: self.preservation_by_length.iter().map(|r| r.length.to_string()).collect(),
                series: vec![(
                    "mean preservation".into(),
                    self.preservation_by_length.iter().map(|r| f(r.mean_preservation)).collect(),
                )],
            },
            svg::Chart {
                title: "Mean preservation by synthetic count".into(),
                x_label: "synthetic combination count".into(),
                categories: self.preservation_by_count.iter().map(|r| r.bin.to_string()).collect(),
                series: vec![(
                    "mean preservation".into(),
                    self.preservation_by_count.iter().map(|r| f(r.mean_preservation)).collect(),
                )],
            },
        ]
    }

    /// The four TSV tables followed by one SVG chart per table, as `(file name, contents)`.
    pub fn report_files(&self) -> std::io::Result<Vec<(String, Vec<u8>)>> {
        let mut files = Vec::with_capacity(8);
        let mut tsv = |name: &str, f: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> std::io::Result<()> {
            let mut buf = Vec::new();
            f(&mut buf)?;
            files.push((format!("{name}.tsv"), buf));
            Ok(())
        };
        tsv(RARE_BY_LENGTH, &|b| self.write_rare_tsv(b))?;
        tsv(LEAKAGE_BY_LENGTH, &|b| self.write_leakage_tsv(b))?;
        tsv(PRESERVATION_BY_LENGTH, &|b| self.write_preservation_by_length_tsv(b))?;
        tsv(PRESERVATION_BY_COUNT, &|b| self.write_preservation_by_count_tsv(b))?;
        let names = [RARE_BY_LENGTH, LEAKAGE_BY_LENGTH, PRESERVATION_BY_LENGTH, PRESERVATION_BY_COUNT];
        for (name, chart) in names.iter().zip(self.charts()) {
            files.push((format!("{name}.svg"), chart.render().into_bytes()));
        }
        Ok(files)
    }

    /// Writes [`EvaluationSummary::report_files`] into `dir` and returns the paths.
    pub fn emit_reports(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (name, bytes) in self.report_files()? {
            let path = dir.join(name);
            std::fs::write(&path, bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregates::compute_aggregates;
    use crate::ingest::{AttributeValue, SensitiveDataset};

    fn av(c: &str) -> AttributeValue {
        AttributeValue::new(c, "1")
    }

    fn dataset(sets: Vec<Vec<&str>>) -> SensitiveDataset {
        SensitiveDataset::from_attribute_sets(vec![], sets.into_iter().map(|s| s.into_iter().map(av).collect()))
    }

    fn fixture() -> SensitiveDataset {
        let mut sets = vec![vec!["A", "B"]; 10];
        sets.extend(vec![vec!["A", "C"]; 2]);
        dataset(sets)
    }

    fn records(sets: Vec<Vec<&str>>) -> Vec<SyntheticRecord> {
        sets.into_iter()
            .map(|s| SyntheticRecord::new(s.into_iter().map(av)))
            .collect()
    }

    #[test]
    fn rare_rows_identical_records() {
        let index = AttributeIndex::build(&dataset(vec![vec!["A", "B"]; 20]));
        let agg = compute_aggregates(&index, 2, 1000).unwrap();
        let rows = rare_by_length::<f64>(&agg, 10, 2);
        assert_eq!((rows[0].combo_count, rows[0].rare_count), (2, 0));
        assert_eq!((rows[1].combo_count, rows[1].rare_count), (1, 0));
    }

    #[test]
    fn rare_rows_fixture() {
        let index = AttributeIndex::build(&fixture());
        let agg = compute_aggregates(&index, 2, 1000).unwrap();
        let rows = rare_by_length::<f64>(&agg, 10, 2);
        // length 1: A=12, B=10, C=2; length 2: AB=10, AC=2
        assert_eq!((rows[0].combo_count, rows[0].rare_count), (3, 1));
        assert_eq!((rows[1].combo_count, rows[1].rare_count), (2, 1));
        assert_eq!(rows[1].rare_proportion, 0.5);
    }

    #[test]
    fn rare_rows_empty() {
        let index = AttributeIndex::build(&dataset(vec![]));
        let agg = compute_aggregates(&index, 3, 1000).unwrap();
        let rows = rare_by_length::<f32>(&agg, 10, 3);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.combo_count == 0 && r.rare_proportion == 0.0));
    }

    #[test]
    fn adversarial_leak_detected() {
        let index = AttributeIndex::build(&fixture());
        let synthetic = records(vec![vec!["A", "C"], vec!["A", "B"]]);
        let stats = synthetic_combination_stats(&index, &synthetic, 2, 1000).unwrap();
        let rows = leakage_by_length::<f64>(&stats, 10, 2);
        // length 1: C (2 < 10) leaks too
        assert_eq!(rows[0].leak_count, 1);
        assert_eq!(rows[1].leak_count, 1);
        assert_eq!(rows[1].combo_count, 2);
        // still defined: {A,C} has sensitive count 2
        assert!(preservation_by_length::<f64>(&stats, 2).is_ok());
    }

    #[test]
    fn unknown_synthetic_value_is_a_leak() {
        let index = AttributeIndex::build(&fixture());
        let stats = synthetic_combination_stats(&index, &records(vec![vec!["Z"]]), 2, 1000).unwrap();
        assert_eq!(leakage_by_length::<f64>(&stats, 1, 2)[0].leak_count, 1);
        assert!(matches!(
            preservation_by_length::<f64>(&stats, 2),
            Err(EvaluationError::MissingSensitiveCount(_))
        ));
    }

    #[test]
    fn empty_synthetic_tables() {
        let index = AttributeIndex::build(&fixture());
        let stats = synthetic_combination_stats(&index, &[], 2, 1000).unwrap();
        let leak = leakage_by_length::<f64>(&stats, 10, 2);
        assert!(leak.iter().all(|r| r.combo_count == 0 && r.leak_count == 0));
        assert!(preservation_by_length::<f64>(&stats, 2).unwrap().is_empty());
        assert!(preservation_by_count::<f64>(&stats, 2).unwrap().is_empty());
    }

    #[test]
    fn identity_preserves_fully() {
        let ds = fixture();
        let index = AttributeIndex::build(&ds);
        let synthetic: Vec<SyntheticRecord> = ds
            .records()
            .iter()
            .map(|r| SyntheticRecord::new(r.attributes.clone()))
            .collect();
        let stats = synthetic_combination_stats(&index, &synthetic, 2, 1000).unwrap();
        let rows = preservation_by_length::<f64>(&stats, 2).unwrap();
        assert!(rows.iter().all(|r| r.mean_preservation == 1.0 && r.mean_raw_ratio == 1.0));
    }

    #[test]
    fn fixture_pipeline_preservation() {
        // After synthesis with k=10: {A,B} x10, {A} x0 (A rounds 12 -> 10); {A,C} absent.
        let index = AttributeIndex::build(&fixture());
        let synthetic = records(vec![vec!["A", "B"]; 10]);
        let stats = synthetic_combination_stats(&index, &synthetic, 2, 1000).unwrap();
        let rows = preservation_by_length::<f64>(&stats, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].mean_preservation, 1.0);
        assert_eq!(rows[1].mean_filtered_count, 10.0);
        // length 1: A 10/12, B 10/10
        assert!((rows[0].mean_preservation - (10.0 / 12.0 + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn preservation_capped_at_one() {
        let index = AttributeIndex::build(&dataset(vec![vec!["A"]; 10]));
        let stats = synthetic_combination_stats(&index, &records(vec![vec!["A"]; 15]), 1, 1000).unwrap();
        let rows = preservation_by_length::<f64>(&stats, 1).unwrap();
        assert_eq!(rows[0].mean_preservation, 1.0);
        assert_eq!(rows[0].mean_raw_ratio, 1.5);
    }

    #[test]
    fn count_bins() {
        let label = |c| CountBin::containing(c).to_string();
        assert_eq!(label(1), "(0,10]");
        assert_eq!(label(10), "(0,10]");
        assert_eq!(label(11), "(10,20]");
        assert_eq!(label(20), "(10,20]");
        assert_eq!(label(21), "(20,40]");
        assert_eq!(label(321), "(320,640]");
    }

    #[test]
    fn equal_counts_fill_one_bin() {
        let index = AttributeIndex::build(&dataset(vec![vec!["A", "B"]; 20]));
        let stats = synthetic_combination_stats(&index, &records(vec![vec!["A", "B"]; 20]), 2, 1000).unwrap();
        let rows = preservation_by_count::<f64>(&stats, 2).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].bin.to_string(), "(10,20]");
        assert!((rows[0].mean_combo_length - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reports_written_with_fixed_names() {
        let ds = fixture();
        let index = AttributeIndex::build(&ds);
        let agg = compute_aggregates(&index, 3, 1000).unwrap();
        let summary = evaluate::<f64>(&index, &agg, &records(vec![vec!["A", "B"]; 10]), 10, 3, 1000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let written = summary.emit_reports(dir.path()).unwrap();
        assert_eq!(written.len(), 8);
        let rare = std::fs::read_to_string(dir.path().join("sensitive_rare_by_length.tsv")).unwrap();
        assert_eq!(
            rare,
            "length\tcombo_count\trare_count\trare_proportion\n1\t3\t1\t0.333333\n2\t2\t1\t0.500000\n3\t0\t0\t0.000000\n"
        );
        let svg = std::fs::read_to_string(dir.path().join("synthetic_preservation_by_count.svg")).unwrap();
        assert!(svg.starts_with("<?xml"));
    }

    #[test]
    fn empty_tables_write_headers_only() {
        let index = AttributeIndex::build(&dataset(vec![]));
        let agg = compute_aggregates(&index, 2, 1000).unwrap();
        let summary = evaluate::<f64>(&index, &agg, &[], 10, 2, 1000).unwrap();
        let mut out = Vec::new();
        summary.write_preservation_by_count_tsv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "count_bin_label\tmean_combo_length\tmean_preservation\tmean_raw_ratio\n"
        );
        let dir = tempfile::tempdir().unwrap();
        summary.emit_reports(dir.path()).unwrap();
    }
}
