use std::path::Path;

use nalgebra::DMatrix;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::spectral::ClusterLabels;

/// Reads a rectangular numeric CSV whose columns are samples. With
/// `has_labels`, the last row holds integer labels.
pub fn load_csv_matrix(path: &Path, has_labels: bool) -> Result<LabeledDataset> {
    let source = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(&source, format!("row {}: {e}", i + 1)))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if record.len() != first.len() {
                return Err(Error::parse(
                    &source,
                    format!("row {}: expected {} columns, found {}", i + 1, first.len(), record.len()),
                ));
            }
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }

    let labels = if has_labels {
        let row = rows
            .pop()
            .ok_or_else(|| Error::parse(&source, "missing label row"))?;
        let line = rows.len() + 1;
        let labels = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<usize>().map_err(|_| {
                    Error::parse(&source, format!("row {line}, column {}: `{cell}` is not a label", c + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(ClusterLabels::from_labels(labels)?)
    } else {
        None
    };

    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let mut x = DMatrix::zeros(m, n);
    for (r, row) in rows.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            x[(r, c)] = cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Error::parse(&source, format!("row {}, column {}: `{cell}` is not a finite number", r + 1, c + 1))
            })?;
        }
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    LabeledDataset::new(x, labels, name, format!("csv:{source}"))
}

/// Writes the matrix row by row with shortest round-trip float formatting,
/// followed by the label row when labels are present.
pub fn write_csv_matrix(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for row in ds.x.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    if let Some(labels) = &ds.labels {
        let cells: Vec<String> = labels.as_slice().iter().map(usize::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
