//! Array and label I/O, plus conversions between NPY arrays and the crate's
//! own types.

pub mod labels;
pub mod npy;

use std::path::Path;

use ndarray::Array2;

pub use labels::{labels_from_npy, parse_labels_csv, read_labels};
pub use npy::{read_npy, write_npy, Dtype, NpyArray, NpyData};

use crate::error::{Error, Result};
use crate::tensor::FeatureMap;

pub fn read_npy_file(path: &Path) -> Result<NpyArray> {
    read_npy(&std::fs::read(path)?)
}

pub fn write_npy_file(path: &Path, array: &NpyArray) -> Result<()> {
    Ok(std::fs::write(path, write_npy(array))?)
}

/// Splits an `N×C×H×W` or `N×C×D×H×W` float array into per-sample maps.
pub fn feature_maps_from_npy(array: &NpyArray) -> Result<Vec<FeatureMap>> {
    let shape = array.shape();
    if shape.len() != 4 && shape.len() != 5 {
        return Err(Error::Npy(format!("feature maps must be N×C×H×W or N×C×D×H×W, got shape {shape:?}")));
    }
    let per_sample: usize = shape[1..].iter().product();
    let data = array.to_f64()?;
    if per_sample == 0 {
        return Err(Error::Npy(format!("feature map dimensions must be positive, got {shape:?}")));
    }
    data.chunks_exact(per_sample).map(|chunk| FeatureMap::new(shape[1..].to_vec(), chunk.to_vec())).collect()
}

/// Stacks same-shaped maps into one `<f8` array with a leading batch axis.
pub fn feature_maps_to_npy(maps: &[FeatureMap]) -> Result<NpyArray> {
    let first = maps.first().ok_or_else(|| Error::Npy("no feature maps to write".into()))?;
    let mut shape = vec![maps.len()];
    shape.extend_from_slice(first.shape());
    let mut data = Vec::with_capacity(shape.iter().product());
    for m in maps {
        if m.shape() != first.shape() {
            return Err(Error::Npy(format!("mixed map shapes {:?} and {:?}", first.shape(), m.shape())));
        }
        data.extend_from_slice(m.data());
    }
    NpyArray::f8(shape, data)
}

/// Reads a 2-D float array.
pub fn matrix_from_npy(array: &NpyArray) -> Result<Array2<f64>> {
    let &[rows, cols] = array.shape() else {
        return Err(Error::Npy(format!("expected a 2-D array, got shape {:?}", array.shape())));
    };
    Ok(Array2::from_shape_vec((rows, cols), array.to_f64()?).expect("shape validated by NpyArray"))
}

pub fn matrix_to_npy(m: &Array2<f64>) -> NpyArray {
    NpyArray::f8(vec![m.nrows(), m.ncols()], m.iter().copied().collect()).expect("matching length")
}

pub fn labels_to_npy(labels: &[usize]) -> NpyArray {
    NpyArray::i8(vec![labels.len()], labels.iter().map(|&y| y as i64).collect()).expect("matching length")
}
