//! Delimited-text ingestion: raw tables, quantization, and attribute records.
//!
//! A cell contributes an attribute value only when it signals presence. The
//! configured absence tokens (by default `""` and `"0"`) are skipped, except
//! that a literal `"0"` in a sensitive-zero column is kept as a value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, Quantization};
use crate::error::IngestError;

/// A `(column, value)` pair. Ordered lexicographically by column, then value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttributeValue {
    pub column: String,
    pub value: String,
}

impl AttributeValue {
    pub fn new(column: impl Into<String>, value: impl Into<String>) -> Self {
        AttributeValue {
            column: column.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.column, self.value)
    }
}

/// Header plus rows of verbatim text cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn column_position(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Parses delimited UTF-8 text with a mandatory header row.
///
/// Quoting is honoured for non-tab delimiters only; TSV cells are split on
/// tabs verbatim. Data rows are numbered from 1 in error messages.
pub fn parse_table(bytes: &[u8], delimiter: u8) -> Result<RawTable, IngestError> {
    std::str::from_utf8(bytes)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .quoting(delimiter != b'\t')
        .flexible(true)
        .from_reader(bytes);

    let mut records = reader.records();
    let header_record = match records.next() {
        Some(r) => r?,
        None => return Err(IngestError::MissingHeader),
    };
    let mut header = Vec::with_capacity(header_record.len());
    let mut seen = BTreeSet::new();
    for (i, name) in header_record.iter().enumerate() {
        let name = name.trim();
        if name.is_empty() {
            return Err(IngestError::EmptyColumnName(i));
        }
        if !seen.insert(name.to_string()) {
            return Err(IngestError::DuplicateColumn(name.to_string()));
        }
        header.push(name.to_string());
    }

    let mut rows = Vec::new();
    for (i, record) in records.enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(IngestError::RaggedRow {
                row: i + 1,
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(RawTable { header, rows })
}

/// Decides which cells denote absence of an attribute.
#[derive(Debug, Clone)]
pub struct AbsenceRule {
    tokens: BTreeSet<String>,
    sensitive_zeros: BTreeSet<String>,
}

impl AbsenceRule {
    pub fn new(tokens: &[String], sensitive_zeros: &[String]) -> Self {
        AbsenceRule {
            tokens: tokens.iter().map(|t| t.trim().to_string()).collect(),
            sensitive_zeros: sensitive_zeros.iter().cloned().collect(),
        }
    }

    pub fn from_config(config: &PipelineConfig) -> Self {
        AbsenceRule::new(&config.absence_tokens, &config.sensitive_zeros)
    }

    /// `value` is expected to be trimmed already.
    pub fn is_absent(&self, column: &str, value: &str) -> bool {
        if value.is_empty() {
            return true;
        }
        if value == "0" && self.sensitive_zeros.contains(column) {
            return false;
        }
        self.tokens.contains(value)
    }

    pub fn is_sensitive_zero(&self, column: &str) -> bool {
        self.sensitive_zeros.contains(column)
    }
}

fn bin_label(lo: f64, hi: f64, closed: bool) -> String {
    if closed {
        format!("[{lo},{hi}]")
    } else {
        format!("[{lo},{hi})")
    }
}

fn quantize_value(q: &Quantization, v: f64) -> Option<String> {
    match q {
        Quantization::Edges(edges) => {
            let last = edges.len() - 1;
            if v < edges[0] || v > edges[last] {
                return None;
            }
            // First bin whose upper edge exceeds v; v equal to the top edge lands in the final bin.
            let i = edges[1..]
                .iter()
                .position(|&hi| v < hi)
                .unwrap_or(last - 1);
            Some(bin_label(edges[i], edges[i + 1], i + 1 == last))
        }
        Quantization::Width { width } => {
            let i = (v / width).floor();
            Some(bin_label(i * width, (i + 1.0) * width, false))
        }
    }
}

/// Replaces numeric cells of quantized columns with bin labels.
///
/// Bins are left-closed and right-open, except the last explicit bin which is
/// closed. Absent cells are left untouched.
pub fn quantize(
    table: &RawTable,
    spec: &BTreeMap<String, Quantization>,
    absence: &AbsenceRule,
) -> Result<RawTable, IngestError> {
    let mut out = table.clone();
    for (column, q) in spec {
        let pos = table
            .column_position(column)
            .ok_or_else(|| IngestError::UnknownColumn(column.clone()))?;
        for (i, row) in out.rows.iter_mut().enumerate() {
            let cell = row[pos].trim();
            if absence.is_absent(column, cell) {
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| IngestError::NonNumeric {
                    row: i + 1,
                    column: column.clone(),
                    value: cell.to_string(),
                })?;
            row[pos] = quantize_value(q, v).ok_or_else(|| IngestError::OutOfBins {
                row: i + 1,
                column: column.clone(),
                value: v,
            })?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnInfo {
    pub name: String,
    /// Binary presence column (one column of a multi-valued attribute).
    pub multi_valued: bool,
    pub sensitive_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitiveRecord {
    pub id: usize,
    /// Sorted, deduplicated.
    pub attributes: Vec<AttributeValue>,
}

/// Immutable set of sensitive records with ids `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensitiveDataset {
    records: Vec<SensitiveRecord>,
    columns: Vec<ColumnInfo>,
}

impl SensitiveDataset {
    /// Builds a dataset from attribute sets, assigning ids in order.
    pub fn from_attribute_sets<I>(columns: Vec<ColumnInfo>, sets: I) -> Self
    where
        I: IntoIterator<Item = Vec<AttributeValue>>,
    {
        let records = sets
            .into_iter()
            .enumerate()
            .map(|(id, mut attributes)| {
                attributes.sort();
                attributes.dedup();
                SensitiveRecord { id, attributes }
            })
            .collect();
        SensitiveDataset { records, columns }
    }

    pub fn records(&self) -> &[SensitiveRecord] {
        &self.records
    }

    pub fn columns(&self) -> &[ColumnInfo] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes the dataset as delimited text that [`ingest`] reads back unchanged.
    pub fn write_delimited<W: Write>(&self, writer: W, delimiter: u8) -> std::io::Result<()> {
        write_attribute_rows(
            writer,
            delimiter,
            &self.columns,
            self.records.iter().map(|r| r.attributes.as_slice()),
        )
    }
}

/// Writes attribute sets as one row per set under the given columns; absent
/// columns are left empty.
pub fn write_attribute_rows<'a, W, I>(
    mut writer: W,
    delimiter: u8,
    columns: &[ColumnInfo],
    rows: I,
) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a [AttributeValue]>,
{
    let position: BTreeMap<&str, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), i))
        .collect();
    let mut cells = vec![""; columns.len()];
    if delimiter == b'\t' {
        // Cells never contain tabs or newlines (see `clean_cell`), so no quoting is needed.
        let header: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        writeln!(writer, "{}", header.join("\t"))?;
        for attributes in rows {
            cells.iter_mut().for_each(|c| *c = "");
            for a in attributes {
                if let Some(&i) = position.get(a.column.as_str()) {
                    cells[i] = a.value.as_str();
                }
            }
            writeln!(writer, "{}", cells.join("\t"))?;
        }
        return writer.flush();
    }
    let mut out = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    out.write_record(columns.iter().map(|c| c.name.as_str()))?;
    for attributes in rows {
        cells.iter_mut().for_each(|c| *c = "");
        for a in attributes {
            if let Some(&i) = position.get(a.column.as_str()) {
                cells[i] = a.value.as_str();
            }
        }
        out.write_record(&cells)?;
    }
    out.flush()?;
    Ok(())
}

fn clean_cell(cell: &str) -> String {
    cell.trim()
        .chars()
        .map(|c| if matches!(c, '\t' | '\n' | '\r') { ' ' } else { c })
        .collect()
}

/// Turns table rows into attribute records over the selected columns.
///
/// Cells are trimmed. A column is treated as multi-valued (binary presence)
/// when all its present values are `"1"`.
pub fn to_records(table: &RawTable, config: &PipelineConfig) -> Result<SensitiveDataset, IngestError> {
    let absence = AbsenceRule::from_config(config);
    let selected: Vec<(usize, &str)> = if config.use_columns.is_empty() {
        table.header.iter().map(String::as_str).enumerate().collect()
    } else {
        config
            .use_columns
            .iter()
            .map(|c| {
                table
                    .column_position(c)
                    .map(|p| (p, c.as_str()))
                    .ok_or_else(|| IngestError::UnknownColumn(c.clone()))
            })
            .collect::<Result<_, _>>()?
    };

    let mut binary = vec![true; selected.len()];
    let mut sets = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let mut attributes = Vec::new();
        for (j, &(pos, column)) in selected.iter().enumerate() {
            let cell = clean_cell(&row[pos]);
            if absence.is_absent(column, &cell) {
                continue;
            }
            if cell != "1" {
                binary[j] = false;
            }
            attributes.push(AttributeValue::new(column, cell));
        }
        sets.push(attributes);
    }

    let columns = selected
        .iter()
        .zip(binary)
        .map(|(&(_, name), multi_valued)| ColumnInfo {
            name: name.to_string(),
            multi_valued,
            sensitive_zero: absence.is_sensitive_zero(name),
        })
        .collect();
    Ok(SensitiveDataset::from_attribute_sets(columns, sets))
}

/// Parse, quantize and convert raw bytes according to `config`.
pub fn ingest(bytes: &[u8], config: &PipelineConfig) -> Result<SensitiveDataset, crate::PipelineError> {
    let table = parse_table(bytes, config.delimiter)?;
    config.validate_columns(&table.header)?;
    let table = quantize(&table, &config.quantization, &AbsenceRule::from_config(config))?;
    Ok(to_records(&table, config)?)
}
