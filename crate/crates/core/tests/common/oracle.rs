//! Naive reference pooling that materializes every bin by explicit index
//! enumeration. Shares nothing with the library kernels except the config
//! accessors.

#![allow(dead_code)]

use dvpool::{DvppConfig, FeatureMap, Reduction, Variant};

#[derive(Debug, Clone)]
pub struct Dense {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Dense {
    pub fn from_map(x: &FeatureMap) -> Self {
        Self { shape: x.shape().to_vec(), data: x.data().to_vec() }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        let mut off = 0;
        for (i, (&ix, &dim)) in idx.iter().zip(&self.shape).enumerate() {
            assert!(ix < dim, "index {ix} out of bounds on axis {i}");
            off = off * dim + ix;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }
}

/// Bin `i` of `n` over `extent`, from real-valued floor/ceil.
pub fn bin(extent: usize, n: usize, i: usize) -> (usize, usize) {
    let lo = (i as f64 * extent as f64 / n as f64).floor() as usize;
    let hi = ((i + 1) as f64 * extent as f64 / n as f64).ceil() as usize;
    (lo, hi)
}

/// Every index tuple in the box `ranges`, last axis fastest.
pub fn cartesian(ranges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &(lo, hi) in ranges {
        let mut next = Vec::new();
        for prefix in &out {
            for v in lo..hi {
                let mut t = prefix.clone();
                t.push(v);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn reduce(values: &[f64], max: bool) -> f64 {
    if max {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

pub fn naive_sp(x: &Dense, n: usize, max: bool) -> Dense {
    let spatial = &x.shape[1..];
    let mut shape = vec![x.shape[0]];
    shape.extend(std::iter::repeat_n(n, spatial.len()));
    let mut data = Vec::new();
    let bin_grid = cartesian(&vec![(0, n); spatial.len()]);
    for c in 0..x.shape[0] {
        for bins in &bin_grid {
            let ranges: Vec<_> = bins.iter().zip(spatial).map(|(&i, &s)| bin(s, n, i)).collect();
            let values: Vec<f64> = cartesian(&ranges)
                .into_iter()
                .map(|pos| {
                    let mut idx = vec![c];
                    idx.extend(pos);
                    x.get(&idx)
                })
                .collect();
            data.push(reduce(&values, max));
        }
    }
    Dense { shape, data }
}

pub fn naive_ccp(x: &Dense, m: usize, max: bool) -> Dense {
    let spatial = &x.shape[1..];
    let mut shape = vec![m];
    shape.extend_from_slice(spatial);
    let positions = cartesian(&spatial.iter().map(|&s| (0, s)).collect::<Vec<_>>());
    let mut data = Vec::new();
    for g in 0..m {
        let (lo, hi) = bin(x.shape[0], m, g);
        for pos in &positions {
            let values: Vec<f64> = (lo..hi)
                .map(|c| {
                    let mut idx = vec![c];
                    idx.extend(pos);
                    x.get(&idx)
                })
                .collect();
            data.push(reduce(&values, max));
        }
    }
    Dense { shape, data }
}

/// Composition outputs, branch order as in each bracketed formula.
pub fn naive_dvpp(x: &Dense, cfg: &DvppConfig) -> Vec<f64> {
    let max = cfg.reduction() == Reduction::Max;
    let sp = cfg.sp().as_slice();
    let ccp = cfg.ccp().as_slice();
    let aux = cfg.aux().as_slice();

    let spp = |levels: &[usize]| -> Vec<f64> { levels.iter().flat_map(|&n| naive_sp(x, n, max).data).collect() };
    let ccpp = |levels: &[usize]| -> Vec<f64> { levels.iter().flat_map(|&m| naive_ccp(x, m, max).data).collect() };
    let ser = || -> Vec<f64> {
        let mut out = Vec::new();
        for &n in sp {
            for &m in ccp {
                out.extend(naive_ccp(&naive_sp(x, n, max), m, max).data);
            }
        }
        out
    };
    let twin_ser = || -> Vec<f64> {
        let mut out = Vec::new();
        for &n in sp {
            for &m in ccp {
                out.extend(naive_sp(&naive_ccp(x, m, max), n, max).data);
            }
        }
        out
    };

    match cfg.variant() {
        Variant::SpOnly => spp(sp),
        Variant::CcpOnly => ccpp(ccp),
        Variant::ScSer => ser(),
        Variant::ScSSer => [ser(), spp(aux)].concat(),
        Variant::ScCSer => [ser(), ccpp(aux)].concat(),
        Variant::ScPar => [spp(sp), ccpp(ccp)].concat(),
        Variant::Twins => [twin_ser(), ccpp(ccp), spp(sp)].concat(),
    }
}

/// Literal global average pooling: `μ_c = (1 / |plane|) Σ x_c(pos)`.
pub fn literal_gap(x: &Dense) -> Vec<f64> {
    let plane: usize = x.shape[1..].iter().product();
    (0..x.shape[0]).map(|c| x.data[c * plane..(c + 1) * plane].iter().sum::<f64>() / plane as f64).collect()
}

/// Literal cross-channel average pooling: `μ(pos) = (1 / C) Σ_k x(k, pos)`.
pub fn literal_cap(x: &Dense) -> Vec<f64> {
    let plane: usize = x.shape[1..].iter().product();
    let c = x.shape[0];
    (0..plane).map(|p| (0..c).map(|k| x.data[k * plane + p]).sum::<f64>() / c as f64).collect()
}
