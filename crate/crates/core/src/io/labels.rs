use std::path::Path;

use super::npy::{self, NpyData};
use crate::error::{Error, Result};

/// Reads class labels from an `<i8` NPY vector or a single-column CSV with a
/// `label` header, chosen by file extension.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let bytes = std::fs::read(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("npy") => labels_from_npy(&npy::read_npy(&bytes)?),
        Some("csv") => {
            let text = std::str::from_utf8(&bytes).map_err(|_| Error::Labels("CSV is not UTF-8".into()))?;
            parse_labels_csv(text)
        }
        _ => Err(Error::Labels(format!("{}: expected a .npy or .csv file", path.display()))),
    }
}

pub fn labels_from_npy(array: &npy::NpyArray) -> Result<Vec<usize>> {
    if array.shape().len() != 1 {
        return Err(Error::Labels(format!("labels must be a 1-D array, got shape {:?}", array.shape())));
    }
    let NpyData::I8(values) = array.data() else {
        return Err(Error::Labels(format!("labels must be <i8, got {}", array.dtype().descr())));
    };
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| usize::try_from(v).map_err(|_| Error::Labels(format!("negative label {v} at index {i}"))))
        .collect()
}

pub fn parse_labels_csv(text: &str) -> Result<Vec<usize>> {
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    match lines.next() {
        Some(h) if h.trim() == "label" => {}
        Some(h) => return Err(Error::Labels(format!("expected header 'label', found '{h}'"))),
        None => return Err(Error::Labels("empty CSV".into())),
    }
    let rows: Vec<&str> = lines.collect();
    // a single trailing newline yields no extra line; anything blank after that is an error
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let field = row.trim();
            field
                .parse::<usize>()
                .map_err(|_| Error::Labels(format!("row {}: '{field}' is not a non-negative integer label", i + 2)))
        })
        .collect()
}
