//! Reading and writing distance matrices and marker bundles.
//!
//! Matrices are CSV files whose header row is `label,L1,...,Ln` and whose
//! rows are `Li,v_i1,...,v_in`. Values are integers, decimals or `p/q`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::metric::{DistanceMatrix, MatrixError};
use crate::phylo::{GridSpec, MarkerSet, PhyloError};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("input is empty")]
    EmptyInput,
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("header must start with `label`, found `{0}`")]
    Header(String),
    #[error("line {line}, column {column}: {message}")]
    Cell {
        line: u64,
        column: usize,
        message: String,
    },
    #[error("row label `{0}` does not appear in the header")]
    UnknownRow(String),
    #[error("row label `{0}` appears twice")]
    DuplicateRow(String),
    #[error("no row for label `{0}`")]
    MissingRow(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error(transparent)]
    Phylo(#[from] PhyloError),
}

fn open(path: &Path) -> Result<File, InputError> {
    File::open(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_matrix<R: Read>(reader: R) -> Result<DistanceMatrix, InputError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv.records();
    let header = match records.next() {
        None => return Err(InputError::EmptyInput),
        Some(r) => r.map_err(csv_error)?,
    };
    let first = header.get(0).unwrap_or("");
    if first != "label" {
        return Err(InputError::Header(first.to_string()));
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if labels.is_empty() {
        return Err(InputError::EmptyInput);
    }
    let position: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let n = labels.len();
    let mut rows: Vec<Option<Vec<Rational>>> = vec![None; n];
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let name = record.get(0).unwrap_or("");
        let index = *position
            .get(name)
            .ok_or_else(|| InputError::UnknownRow(name.to_string()))?;
        if rows[index].is_some() {
            return Err(InputError::DuplicateRow(name.to_string()));
        }
        if record.len() != n + 1 {
            return Err(InputError::Cell {
                line,
                column: record.len(),
                message: format!("expected {} values, found {}", n, record.len() - 1),
            });
        }
        let mut values = Vec::with_capacity(n);
        for (column, cell) in record.iter().enumerate().skip(1) {
            let value = parse_rational(cell).map_err(|e| InputError::Cell {
                line,
                column: column + 1,
                message: e.to_string(),
            })?;
            values.push(value);
        }
        rows[index] = Some(values);
    }
    let entries = rows
        .into_iter()
        .zip(&labels)
        .map(|(row, label)| row.ok_or_else(|| InputError::MissingRow(label.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DistanceMatrix::new(labels, entries)?)
}

fn csv_error(e: csv::Error) -> InputError {
    InputError::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

pub fn read_matrix_path(path: &Path) -> Result<DistanceMatrix, InputError> {
    read_matrix(open(path)?)
}

pub fn write_matrix<W: Write>(matrix: &DistanceMatrix, writer: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["label".to_string()];
    header.extend(matrix.labels().iter().map(|l| l.as_str().to_string()));
    out.write_record(&header)?;
    for (label, row) in matrix.labels().iter().zip(matrix.rows()) {
        let mut record = vec![label.as_str().to_string()];
        record.extend(row.iter().map(format_rational));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct Manifest {
    markers: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    id: String,
    path: PathBuf,
}

#[derive(Debug, Deserialize)]
struct SweepSpec {
    grid: GridSpec,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, InputError> {
    serde_json::from_reader(open(path)?).map_err(|e| InputError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Loads `{"markers":[{"id":..,"path":..}]}`; paths are relative to the
/// manifest's directory.
pub fn read_manifest(path: &Path) -> Result<MarkerSet, InputError> {
    let manifest: Manifest = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut markers = Vec::with_capacity(manifest.markers.len());
    for entry in manifest.markers {
        let matrix = read_matrix_path(&base.join(&entry.path))?;
        markers.push((entry.id, matrix));
    }
    Ok(MarkerSet::new(markers)?)
}

/// Loads `{"grid": {"type": "simplex", "resolution": n}}` or
/// `{"grid": {"type": "explicit", "weights": [[..], ..]}}`. Explicit weights
/// may be JSON numbers or strings such as `"1/3"`.
pub fn read_sweep_spec(path: &Path) -> Result<GridSpec, InputError> {
    let raw: serde_json::Value = read_json(path)?;
    let normalized = normalize_weights(raw);
    let spec: SweepSpec = serde_json::from_value(normalized).map_err(|e| InputError::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(spec.grid)
}

fn normalize_weights(mut raw: serde_json::Value) -> serde_json::Value {
    if let Some(rows) = raw
        .get_mut("grid")
        .and_then(|g| g.get_mut("weights"))
        .and_then(|w| w.as_array_mut())
    {
        for row in rows {
            if let Some(cells) = row.as_array_mut() {
                for cell in cells {
                    if let serde_json::Value::Number(n) = cell {
                        *cell = serde_json::Value::String(n.to_string());
                    }
                }
            }
        }
    }
    raw
}
