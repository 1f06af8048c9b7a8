//! Dense feature maps and the block-reduction kernels all pooling is built on.
//!
//! A [`FeatureMap`] is laid out channel-first, `C×H×W` or `C×D×H×W`, in
//! row-major order. Internally every map is addressed as `C×D×H×W` with
//! `D = 1` for planar maps, which keeps the kernels rank-agnostic.

use std::ops::Range;

use crate::error::{contract, Error, Result};

/// A dense channel-first activation tensor with 2 or 3 spatial axes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.len() != 3 && shape.len() != 4 {
            return Err(contract(format!("feature map needs shape C×H×W or C×D×H×W, got rank {}", shape.len())));
        }
        if shape.contains(&0) {
            return Err(contract(format!("feature map dimensions must be positive: {shape:?}")));
        }
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: data.len() });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(contract(format!("non-finite value at flat index {pos}")));
        }
        Ok(Self { shape, data })
    }

    /// Widens single-precision input.
    pub fn from_f32(shape: Vec<usize>, data: &[f32]) -> Result<Self> {
        Self::new(shape, data.iter().map(|&v| f64::from(v)).collect())
    }

    /// Builds a map by evaluating `f` at every flat row-major index.
    pub fn from_fn(shape: Vec<usize>, f: impl FnMut(usize) -> f64) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, (0..len).map(f).collect())
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![value; len])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn channels(&self) -> usize {
        self.shape[0]
    }

    pub fn spatial(&self) -> &[usize] {
        &self.shape[1..]
    }

    pub fn spatial_rank(&self) -> usize {
        self.shape.len() - 1
    }

    /// Number of positions in one channel plane.
    pub fn plane_len(&self) -> usize {
        self.spatial().iter().product()
    }

    /// One channel's plane, row-major.
    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.plane_len();
        &self.data[c * plane..(c + 1) * plane]
    }

    /// Spatial extents padded to `(D, H, W)`.
    pub(crate) fn dims3(&self) -> [usize; 3] {
        match *self.spatial() {
            [h, w] => [1, h, w],
            [d, h, w] => [d, h, w],
            _ => unreachable!("rank validated on construction"),
        }
    }

    /// Builds a map whose spatial rank matches `like`, with `channels` channels
    /// and padded spatial extents `dims`. Values are trusted to be finite.
    pub(crate) fn from_parts_unchecked(channels: usize, dims: [usize; 3], spatial_rank: usize, data: Vec<f64>) -> Self {
        let mut shape = vec![channels];
        if spatial_rank == 3 {
            shape.push(dims[0]);
        }
        shape.extend_from_slice(&dims[1..]);
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }
}

/// A named span of a [`FeatureVector`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Flattened pooled output along with which branch produced each span.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    data: Vec<f64>,
    segments: Vec<Segment>,
}

impl FeatureVector {
    /// A vector made of a single segment.
    pub fn new(name: impl Into<String>, data: Vec<f64>) -> Self {
        let len = data.len();
        Self { data, segments: vec![Segment { name: name.into(), offset: 0, len }] }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Values of segment `i`.
    pub fn segment(&self, i: usize) -> Option<&[f64]> {
        self.segments.get(i).map(|s| &self.data[s.offset..s.offset + s.len])
    }

    /// Renames every segment with `prefix` prepended.
    pub(crate) fn prefixed(mut self, prefix: &str) -> Self {
        for s in &mut self.segments {
            s.name = format!("{prefix}{}", s.name);
        }
        self
    }
}

/// Concatenates vectors in order, shifting segment offsets accordingly.
pub fn concat(vs: Vec<FeatureVector>) -> Result<FeatureVector> {
    if vs.is_empty() {
        return Err(contract("concat of an empty list"));
    }
    let total = vs.iter().map(FeatureVector::len).sum();
    let mut data = Vec::with_capacity(total);
    let mut segments = Vec::new();
    for v in vs {
        let base = data.len();
        segments.extend(v.segments.into_iter().map(|s| Segment { offset: s.offset + base, ..s }));
        data.extend(v.data);
    }
    Ok(FeatureVector { data, segments })
}

fn check_region(x: &FeatureMap, channels: &Range<usize>, spatial: &[Range<usize>]) -> Result<[Range<usize>; 3]> {
    if spatial.len() != x.spatial_rank() {
        return Err(contract(format!("expected {} spatial ranges, got {}", x.spatial_rank(), spatial.len())));
    }
    let check = |r: &Range<usize>, extent: usize, axis: &str| {
        if r.start >= r.end || r.end > extent {
            Err(contract(format!("{axis} range {r:?} is empty or exceeds extent {extent}")))
        } else {
            Ok(())
        }
    };
    check(channels, x.channels(), "channel")?;
    for (i, (r, &extent)) in spatial.iter().zip(x.spatial()).enumerate() {
        check(r, extent, &format!("spatial axis {i}"))?;
    }
    Ok(match spatial {
        [h, w] => [0..1, h.clone(), w.clone()],
        [d, h, w] => [d.clone(), h.clone(), w.clone()],
        _ => unreachable!(),
    })
}

/// Visits every contiguous W-row of the block in row-major order.
#[inline]
pub(crate) fn for_each_row(
    x: &FeatureMap,
    channels: Range<usize>,
    block: &[Range<usize>; 3],
    mut f: impl FnMut(&[f64]),
) {
    let [_, h, w] = x.dims3();
    let [dr, hr, wr] = block;
    let plane = x.plane_len();
    for c in channels {
        for d in dr.clone() {
            for r in hr.clone() {
                let start = c * plane + (d * h + r) * w;
                f(&x.data[start + wr.start..start + wr.end]);
            }
        }
    }
}

/// Sum and element count of a block, accumulated left to right in row-major order.
#[inline]
pub(crate) fn block_sum(x: &FeatureMap, channels: Range<usize>, block: &[Range<usize>; 3]) -> (f64, usize) {
    let mut sum = 0.0;
    let mut count = 0;
    for_each_row(x, channels, block, |row| {
        for &v in row {
            sum += v;
        }
        count += row.len();
    });
    (sum, count)
}

#[inline]
pub(crate) fn block_max(x: &FeatureMap, channels: Range<usize>, block: &[Range<usize>; 3]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for_each_row(x, channels, block, |row| {
        for &v in row {
            m = m.max(v);
        }
    });
    m
}

/// Arithmetic mean over an axis-aligned block. Ranges are half-open.
pub fn region_mean(x: &FeatureMap, channels: Range<usize>, spatial: &[Range<usize>]) -> Result<f64> {
    let block = check_region(x, &channels, spatial)?;
    let (sum, count) = block_sum(x, channels, &block);
    Ok(sum / count as f64)
}

/// Maximum over an axis-aligned block. Ranges are half-open.
pub fn region_max(x: &FeatureMap, channels: Range<usize>, spatial: &[Range<usize>]) -> Result<f64> {
    let block = check_region(x, &channels, spatial)?;
    Ok(block_max(x, channels, &block))
}
