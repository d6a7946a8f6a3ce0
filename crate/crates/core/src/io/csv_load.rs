//! CSV ingestion with label mapping.
//!
//! Files are plain delimited text, one sample per row. The label lives in
//! one column (the last, by convention) and may be any token — numeric or
//! not; it is mapped to ±1 by value. Feature cells must parse as finite
//! numbers; anything else (including empty cells) rejects the row with its
//! 1-based row number rather than being imputed.

use std::collections::BTreeSet;
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::Error;
use crate::Result;

/// Ingestion options; the defaults match the bundled benchmark files.
#[derive(Debug, Clone)]
pub struct CsvOptions {
    /// 0-based label column; `None` means the last column.
    pub label_column: Option<usize>,
    /// Label value mapped to +1. `None` picks the smaller of the two
    /// distinct values (numerically when both parse, lexically otherwise).
    pub positive_label: Option<String>,
    /// Field delimiter.
    pub delimiter: u8,
    /// Header presence; `None` auto-detects by trying to parse the first
    /// row's non-label cells as numbers.
    pub header: Option<bool>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label_column: None,
            positive_label: None,
            delimiter: b',',
            header: None,
        }
    }
}

/// A loaded dataset plus ingestion facts callers may want to report.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    /// The labeled samples.
    pub dataset: Dataset,
    /// Columns in the file (features + label).
    pub raw_columns: usize,
    /// Resolved 0-based label column.
    pub label_column: usize,
    /// Label value mapped to +1.
    pub positive_label: String,
    /// Label value mapped to −1.
    pub negative_label: String,
    /// Whether a header row was present (given or detected).
    pub had_header: bool,
}

fn read_rows(path: &Path, delimiter: u8) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::data_row(i + 1, format!("unreadable row: {e}")))?;
        let cells: Vec<String> = record.iter().map(|c| c.to_string()).collect();
        // Skip blank lines (a single empty cell).
        if cells.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(cells);
    }
    Ok(rows)
}

fn parse_feature(cell: &str, row: usize, col: usize) -> Result<f64> {
    if cell.is_empty() {
        return Err(Error::data_row(
            row,
            format!("missing value in column {col} (missing values are rejected, not imputed)"),
        ));
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::data_row(
            row,
            format!("column {col} value {cell:?} is not a finite number"),
        )),
    }
}

/// Order two label values: numerically when both parse, lexically
/// otherwise. The smaller one is the default positive label.
fn smaller_label(a: &str, b: &str) -> bool {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) if x != y => x < y,
        _ => a < b,
    }
}

/// Load a labeled dataset from a delimited text file.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let rows = read_rows(path, options.delimiter)?;
    if rows.is_empty() {
        return Err(Error::data(format!("{} has no data rows", path.display())));
    }
    let raw_columns = rows[0].len();
    if raw_columns < 2 {
        return Err(Error::data(format!(
            "{} has {raw_columns} column(s); need at least one feature and a label",
            path.display()
        )));
    }
    let label_column = match options.label_column {
        Some(c) if c >= raw_columns => {
            return Err(Error::config(format!(
                "label column {c} out of range for a {raw_columns}-column file"
            )));
        }
        Some(c) => c,
        None => raw_columns - 1,
    };

    // Header detection: a first row whose non-label cells are not all
    // numeric can only be a header. (Label cells are allowed to be
    // non-numeric in data rows, so they say nothing.)
    let had_header = match options.header {
        Some(h) => h,
        None => rows[0]
            .iter()
            .enumerate()
            .any(|(j, cell)| j != label_column && cell.parse::<f64>().is_err()),
    };
    let feature_names: Option<Vec<String>> = had_header.then(|| {
        rows[0]
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != label_column)
            .map(|(_, c)| c.clone())
            .collect()
    });
    let data_rows = &rows[usize::from(had_header)..];
    if data_rows.is_empty() {
        return Err(Error::data(format!(
            "{} has a header but no data rows",
            path.display()
        )));
    }

    let mut features = Vec::with_capacity(data_rows.len());
    let mut raw_labels = Vec::with_capacity(data_rows.len());
    for (offset, cells) in data_rows.iter().enumerate() {
        // 1-based row number in the file, counting the header.
        let row_no = offset + 1 + usize::from(had_header);
        if cells.len() != raw_columns {
            return Err(Error::data_row(
                row_no,
                format!("has {} columns, expected {raw_columns}", cells.len()),
            ));
        }
        let mut feat = Vec::with_capacity(raw_columns - 1);
        for (j, cell) in cells.iter().enumerate() {
            if j == label_column {
                continue;
            }
            feat.push(parse_feature(cell, row_no, j)?);
        }
        let label = cells[label_column].clone();
        if label.is_empty() {
            return Err(Error::data_row(row_no, "empty label"));
        }
        features.push(feat);
        raw_labels.push(label);
    }

    let distinct: BTreeSet<&str> = raw_labels.iter().map(|s| s.as_str()).collect();
    if distinct.len() == 1 {
        return Err(Error::config(format!(
            "{} contains a single class ({:?}); two classes are required",
            path.display(),
            raw_labels[0]
        )));
    }
    if distinct.len() > 2 {
        let listing: Vec<&str> = distinct.into_iter().collect();
        return Err(Error::data(format!(
            "found {} distinct label values {listing:?}; exactly two are supported",
            listing.len()
        )));
    }
    let mut iter = distinct.into_iter();
    let (first, second) = (iter.next().unwrap(), iter.next().unwrap());
    let positive = match &options.positive_label {
        Some(p) => {
            if p != first && p != second {
                return Err(Error::config(format!(
                    "positive label {p:?} does not occur in the file (labels: {first:?}, {second:?})"
                )));
            }
            p.clone()
        }
        None => {
            if smaller_label(first, second) {
                first.to_string()
            } else {
                second.to_string()
            }
        }
    };
    let negative = if positive == first { second } else { first }.to_string();
    let labels: Vec<f64> = raw_labels
        .iter()
        .map(|l| if *l == positive { 1.0 } else { -1.0 })
        .collect();

    let mut dataset = Dataset::new(features, labels)?;
    dataset.feature_names = feature_names;
    Ok(LoadedCsv {
        dataset,
        raw_columns,
        label_column,
        positive_label: positive,
        negative_label: negative,
        had_header,
    })
}

/// Load an all-numeric feature matrix (no label column), e.g. for
/// prediction inputs. An empty file yields an empty matrix.
pub fn load_csv_features(
    path: impl AsRef<Path>,
    delimiter: u8,
    header: Option<bool>,
) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let rows = read_rows(path, delimiter)?;
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let width = rows[0].len();
    let had_header = match header {
        Some(h) => h,
        None => rows[0].iter().any(|cell| cell.parse::<f64>().is_err()),
    };
    let mut out = Vec::new();
    for (offset, cells) in rows[usize::from(had_header)..].iter().enumerate() {
        let row_no = offset + 1 + usize::from(had_header);
        if cells.len() != width {
            return Err(Error::data_row(
                row_no,
                format!("has {} columns, expected {width}", cells.len()),
            ));
        }
        let mut feat = Vec::with_capacity(width);
        for (j, cell) in cells.iter().enumerate() {
            feat.push(parse_feature(cell, row_no, j)?);
        }
        out.push(feat);
    }
    Ok(out)
}
