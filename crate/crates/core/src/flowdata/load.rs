use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adapter::SchemaAdapter;
use super::Dataset;
use crate::error::{Error, Result};

/// Cell spellings treated as an absent value (imputed as 0).
const MISSING_TOKENS: [&str; 9] = ["", "-", "?", "NA", "N/A", "nan", "NaN", "null", "None"];

/// What happened while turning a raw table into a [`Dataset`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub delimiter: char,
    pub rows_read: usize,
    /// Rows removed because a numeric cell did not parse or the label was empty.
    pub rows_dropped: usize,
    /// Unparseable-cell counts per feature, for the dropped rows.
    pub dropped_by_column: BTreeMap<String, usize>,
    /// Missing cells imputed as 0, per feature (kept rows only).
    pub missing_counts: BTreeMap<String, usize>,
    /// Category strings per label-encoded feature, index = integer code.
    pub encodings: BTreeMap<String, Vec<String>>,
    /// Source columns removed by the adapter's drop list.
    pub dropped_columns: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedTable {
    pub dataset: Dataset,
    pub report: LoadReport,
}

enum Cell {
    Missing,
    Num(f64),
    Text(u32),
}

fn parse_number(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let hex = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X"))?;
    u64::from_str_radix(hex, 16).ok().map(|v| v as f64)
}

/// Reads delimited text (comma or tab, chosen from the header line) and
/// applies `adapter`.
pub fn load_table(path: impl AsRef<Path>, adapter: &SchemaAdapter) -> Result<LoadedTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_table_from_str(&text, adapter)
}

pub fn load_table_from_str(text: &str, adapter: &SchemaAdapter) -> Result<LoadedTable> {
    adapter.validate()?;
    let header_line = text.lines().next().ok_or(Error::EmptyFile)?;
    if header_line.trim().is_empty() {
        return Err(Error::EmptyFile);
    }
    let delimiter = if header_line.contains('\t') { b'\t' } else { b',' };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let label_idx = headers
        .iter()
        .position(|h| *h == adapter.label_column)
        .ok_or_else(|| Error::MissingLabelColumn(adapter.label_column.clone()))?;
    for source in adapter.column_map.keys() {
        if !headers.contains(source) {
            return Err(Error::MissingColumn(source.clone()));
        }
    }

    let mut report = LoadReport {
        delimiter: delimiter as char,
        ..LoadReport::default()
    };
    let mut feature_sources = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if i == label_idx {
            continue;
        }
        if adapter.drop_columns.contains(h) {
            report.dropped_columns.push(h.clone());
            continue;
        }
        feature_sources.push(i);
    }
    let names: Vec<String> = feature_sources
        .iter()
        .map(|&i| adapter.canonical_name(&headers[i]).to_string())
        .collect();

    let n_feat = feature_sources.len();
    let mut cells: Vec<Vec<Cell>> = (0..n_feat).map(|_| Vec::new()).collect();
    let mut texts: Vec<Vec<String>> = vec![Vec::new(); n_feat];
    let mut interners: Vec<HashMap<String, u32>> = vec![HashMap::new(); n_feat];
    let mut labels: Vec<Option<u8>> = Vec::new();

    for (row, record) in reader.records().enumerate() {
        let record = record?;
        report.rows_read += 1;
        let raw_label = record.get(label_idx).unwrap_or("");
        labels.push(if raw_label.is_empty() {
            None
        } else {
            Some(adapter.map_label(raw_label).ok_or_else(|| Error::UnmappableLabel {
                value: raw_label.to_string(),
                row: row + 1,
            })?)
        });
        for (j, &src) in feature_sources.iter().enumerate() {
            let raw = record.get(src).unwrap_or("");
            let cell = if MISSING_TOKENS.contains(&raw) {
                Cell::Missing
            } else if let Some(v) = parse_number(raw) {
                Cell::Num(v)
            } else {
                let next = texts[j].len() as u32;
                let id = *interners[j].entry(raw.to_string()).or_insert_with(|| {
                    texts[j].push(raw.to_string());
                    next
                });
                Cell::Text(id)
            };
            cells[j].push(cell);
        }
    }
    if report.rows_read == 0 {
        return Err(Error::EmptyFile);
    }

    // A column is categorical when text cells outnumber numeric ones;
    // otherwise its text cells are corrupt values and their rows are dropped.
    let categorical: Vec<bool> = cells
        .iter()
        .map(|col| {
            let (mut text, mut num) = (0usize, 0usize);
            for c in col {
                match c {
                    Cell::Text(_) => text += 1,
                    Cell::Num(_) => num += 1,
                    Cell::Missing => {}
                }
            }
            text > num
        })
        .collect();

    let mut keep = vec![true; report.rows_read];
    for (r, l) in labels.iter().enumerate() {
        if l.is_none() {
            keep[r] = false;
        }
    }
    for (j, col) in cells.iter().enumerate() {
        if categorical[j] {
            continue;
        }
        for (r, c) in col.iter().enumerate() {
            if matches!(c, Cell::Text(_)) {
                keep[r] = false;
                *report.dropped_by_column.entry(names[j].clone()).or_default() += 1;
            }
        }
    }
    report.rows_dropped = keep.iter().filter(|k| !**k).count();
    if report.rows_dropped > 0 {
        log::warn!("dropped {} rows with unparseable cells", report.rows_dropped);
    }

    let mut columns = Vec::with_capacity(n_feat);
    for (j, col) in cells.iter().enumerate() {
        let mut out = Vec::with_capacity(col.len());
        let mut missing = 0usize;
        if categorical[j] {
            // First-appearance codes over the kept rows; numeric-looking
            // cells in a categorical column are categories too.
            let mut codes: HashMap<String, usize> = HashMap::new();
            let mut order: Vec<String> = Vec::new();
            for (r, c) in col.iter().enumerate() {
                if !keep[r] {
                    continue;
                }
                let key = match c {
                    Cell::Missing => {
                        missing += 1;
                        out.push(0.0);
                        continue;
                    }
                    Cell::Num(v) => format!("{v}"),
                    Cell::Text(id) => texts[j][*id as usize].clone(),
                };
                let code = *codes.entry(key.clone()).or_insert_with(|| {
                    order.push(key);
                    order.len() - 1
                });
                out.push(code as f64);
            }
            report.encodings.insert(names[j].clone(), order);
        } else {
            for (r, c) in col.iter().enumerate() {
                if !keep[r] {
                    continue;
                }
                out.push(match c {
                    Cell::Num(v) => *v,
                    Cell::Missing => {
                        missing += 1;
                        0.0
                    }
                    Cell::Text(_) => unreachable!("rows with text in numeric columns are dropped"),
                });
            }
        }
        if missing > 0 {
            report.missing_counts.insert(names[j].clone(), missing);
        }
        columns.push(out);
    }
    let labels: Vec<u8> = labels
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(l, _)| l.expect("rows without labels are dropped"))
        .collect();

    let dataset = Dataset::new(names, columns, labels)?;
    Ok(LoadedTable { dataset, report })
}
