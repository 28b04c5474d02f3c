// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV import driven by a JSON manifest.
//!
//! ```json
//! {
//!   "variants": [{"name": "pos", "file": "pos.csv"}, {"name": "neg", "file": "neg.csv"}],
//!   "labels":   [{"name": "truth", "file": "truth.csv"}],
//!   "meta":     {"source": "handmade"}
//! }
//! ```
//!
//! Variant files hold `D` numeric columns and no header. Label files hold a
//! single column of `0`/`1`. Relative paths resolve against the manifest's
//! directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{ActivationMatrix, ContrastSet};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    variants: Vec<Entry>,
    #[serde(default)]
    labels: Vec<Entry>,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    name: String,
    file: PathBuf,
}

pub fn import_csv(manifest_path: impl AsRef<Path>) -> Result<ContrastSet> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("CSV manifest: {e}")))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let variants = manifest
        .variants
        .iter()
        .map(|e| Ok((e.name.clone(), read_matrix(&base.join(&e.file))?)))
        .collect::<Result<Vec<_>>>()?;
    let labels = manifest
        .labels
        .iter()
        .map(|e| Ok((e.name.clone(), read_labels(&base.join(&e.file))?)))
        .collect::<Result<Vec<_>>>()?;
    ContrastSet::new(variants, labels, manifest.meta)
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn read_matrix(path: &Path) -> Result<ActivationMatrix> {
    let mut rows = Vec::new();
    for (i, record) in reader(path)?.records().enumerate() {
        let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    Error::Validation(format!(
                        "{}: row {i}, column {j}: `{cell}` is not a number",
                        path.display()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    ActivationMatrix::from_rows(&rows)
}

fn read_labels(path: &Path) -> Result<Vec<bool>> {
    let mut out = Vec::new();
    for (i, record) in reader(path)?.records().enumerate() {
        let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        match (record.len(), record.get(0)) {
            (1, Some("0")) => out.push(false),
            (1, Some("1")) => out.push(true),
            _ => {
                return Err(Error::Validation(format!(
                    "{}: row {i} must be a single 0 or 1",
                    path.display()
                )))
            }
        }
    }
    Ok(out)
}
