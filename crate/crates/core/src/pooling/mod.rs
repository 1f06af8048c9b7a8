//! Spatial pooling (SP), cross-channel pooling (CCP), their pyramid forms, and
//! the parameter-free dual-view compositions built from them.
//!
//! Every axis is partitioned with the adaptive-bin rule: bin `i` of `n` over an
//! extent `S` spans `[floor(i·S/n), ceil((i+1)·S/n))`. Bins can overlap by one
//! index when `n` does not divide `S`, and repeat elements when `n > S`.

mod config;

use std::ops::Range;

use rayon::prelude::*;

pub use config::{DvppConfig, PyramidLevels, Reduction, Variant};

use crate::error::{contract, Result};
use crate::tensor::{block_max, block_sum, concat, FeatureMap, FeatureVector};

/// Axis a pyramid is built over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolAxis {
    Spatial,
    Channel,
}

/// Bin `i` of `bins` adaptive bins over `extent`.
pub fn adaptive_bin(extent: usize, bins: usize, i: usize) -> Range<usize> {
    debug_assert!(bins > 0 && i < bins);
    (i * extent / bins)..((i + 1) * extent).div_ceil(bins)
}

fn bins(extent: usize, n: usize) -> Vec<Range<usize>> {
    (0..n).map(|i| adaptive_bin(extent, n, i)).collect()
}

/// Pools every channel into an `n×n` (or `n×n×n`) grid of adaptive bins.
///
/// Level 1 with [`Reduction::Avg`] is global average pooling.
pub fn sp_pool(x: &FeatureMap, n: usize, reduction: Reduction) -> Result<FeatureMap> {
    if n == 0 {
        return Err(contract("spatial pooling level must be >= 1"));
    }
    let [d, h, w] = x.dims3();
    let rank = x.spatial_rank();
    let nd = if rank == 3 { n } else { 1 };
    let (dbins, hbins, wbins) = (bins(d, nd), bins(h, n), bins(w, n));

    let channels = x.channels();
    let mut out = Vec::with_capacity(channels * nd * n * n);
    for c in 0..channels {
        for db in &dbins {
            for hb in &hbins {
                for wb in &wbins {
                    let block = [db.clone(), hb.clone(), wb.clone()];
                    out.push(match reduction {
                        Reduction::Avg => {
                            let (sum, count) = block_sum(x, c..c + 1, &block);
                            sum / count as f64
                        }
                        Reduction::Max => block_max(x, c..c + 1, &block),
                    });
                }
            }
        }
    }
    Ok(FeatureMap::from_parts_unchecked(channels, [nd, n, n], rank, out))
}

/// Pools the channel axis into `m` adaptive groups, independently at every
/// spatial position.
///
/// Level 1 with [`Reduction::Avg`] is cross-channel average pooling.
pub fn ccp_pool(x: &FeatureMap, m: usize, reduction: Reduction) -> Result<FeatureMap> {
    if m == 0 {
        return Err(contract("cross-channel pooling level must be >= 1"));
    }
    let plane = x.plane_len();
    let mut out = vec![0.0; m * plane];
    for (g, acc) in out.chunks_exact_mut(plane).enumerate() {
        let group = adaptive_bin(x.channels(), m, g);
        match reduction {
            Reduction::Avg => {
                let count = group.len() as f64;
                for c in group {
                    for (a, &v) in acc.iter_mut().zip(x.channel(c)) {
                        *a += v;
                    }
                }
                acc.iter_mut().for_each(|a| *a /= count);
            }
            Reduction::Max => {
                acc.fill(f64::NEG_INFINITY);
                for c in group {
                    for (a, &v) in acc.iter_mut().zip(x.channel(c)) {
                        *a = a.max(v);
                    }
                }
            }
        }
    }
    Ok(FeatureMap::from_parts_unchecked(m, x.dims3(), x.spatial_rank(), out))
}

/// Concatenated multi-level pooling along one axis, levels ascending.
///
/// `{1}` over the spatial axis is GAP, `{1}` over channels is CAP; several
/// levels give SPP and CCPP respectively.
pub fn pyramid(x: &FeatureMap, levels: &PyramidLevels, axis: PoolAxis, reduction: Reduction) -> Result<FeatureVector> {
    if levels.is_empty() {
        return Err(contract("pyramid needs at least one level"));
    }
    let parts = levels
        .iter()
        .map(|l| match axis {
            PoolAxis::Spatial => sp_pool(x, l, reduction).map(|p| FeatureVector::new(format!("sp{l}"), p.into_data())),
            PoolAxis::Channel => {
                ccp_pool(x, l, reduction).map(|p| FeatureVector::new(format!("ccp{l}"), p.into_data()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    concat(parts)
}

/// `CCP_m(SP_n(X))` for every `(n, m)`, `n` outer.
fn serial_sp_then_ccp(x: &FeatureMap, cfg: &DvppConfig) -> Result<Vec<FeatureVector>> {
    let mut parts = Vec::with_capacity(cfg.sp.as_slice().len() * cfg.ccp.as_slice().len());
    for n in cfg.sp.iter() {
        let spatial = sp_pool(x, n, cfg.reduction)?;
        for m in cfg.ccp.iter() {
            let z = ccp_pool(&spatial, m, cfg.reduction)?;
            parts.push(FeatureVector::new(format!("sp{n}>ccp{m}"), z.into_data()));
        }
    }
    Ok(parts)
}

/// `SP_n(CCP_m(X))` for every `(n, m)`, `n` outer.
fn serial_ccp_then_sp(x: &FeatureMap, cfg: &DvppConfig) -> Result<Vec<FeatureVector>> {
    let pooled: Vec<FeatureMap> = cfg.ccp.iter().map(|m| ccp_pool(x, m, cfg.reduction)).collect::<Result<_>>()?;
    let mut parts = Vec::with_capacity(cfg.sp.as_slice().len() * pooled.len());
    for n in cfg.sp.iter() {
        for (m, channel) in cfg.ccp.iter().zip(&pooled) {
            let z = sp_pool(channel, n, cfg.reduction)?;
            parts.push(FeatureVector::new(format!("ccp{m}>sp{n}"), z.into_data()));
        }
    }
    Ok(parts)
}

/// Runs a pooling composition on one feature map.
///
/// Branches are concatenated in the order the composition lists them, with
/// pyramid levels ascending inside each branch.
pub fn dvpp(x: &FeatureMap, cfg: &DvppConfig) -> Result<FeatureVector> {
    let red = cfg.reduction;
    let parts = match cfg.variant {
        Variant::SpOnly => vec![pyramid(x, &cfg.sp, PoolAxis::Spatial, red)?],
        Variant::CcpOnly => vec![pyramid(x, &cfg.ccp, PoolAxis::Channel, red)?],
        Variant::ScSer => serial_sp_then_ccp(x, cfg)?,
        Variant::ScSSer => {
            let mut parts = serial_sp_then_ccp(x, cfg)?;
            parts.push(pyramid(x, &cfg.aux, PoolAxis::Spatial, red)?.prefixed("aux:"));
            parts
        }
        Variant::ScCSer => {
            let mut parts = serial_sp_then_ccp(x, cfg)?;
            parts.push(pyramid(x, &cfg.aux, PoolAxis::Channel, red)?.prefixed("aux:"));
            parts
        }
        Variant::ScPar => {
            vec![pyramid(x, &cfg.sp, PoolAxis::Spatial, red)?, pyramid(x, &cfg.ccp, PoolAxis::Channel, red)?]
        }
        Variant::Twins => {
            let mut parts = serial_ccp_then_sp(x, cfg)?;
            parts.push(pyramid(x, &cfg.ccp, PoolAxis::Channel, red)?);
            parts.push(pyramid(x, &cfg.sp, PoolAxis::Spatial, red)?);
            parts
        }
    };
    concat(parts)
}

/// Pools a batch of maps in parallel. The result does not depend on the
/// number of worker threads.
pub fn dvpp_batch(xs: &[FeatureMap], cfg: &DvppConfig) -> Result<Vec<FeatureVector>> {
    xs.par_iter().map(|x| dvpp(x, cfg)).collect()
}

/// Length of the vector [`dvpp`] produces for a map of `shape`, without pooling.
pub fn output_len(cfg: &DvppConfig, shape: &[usize]) -> Result<usize> {
    if shape.len() != 3 && shape.len() != 4 {
        return Err(contract(format!("shape must be C×H×W or C×D×H×W, got {shape:?}")));
    }
    if shape.contains(&0) {
        return Err(contract(format!("shape dimensions must be positive: {shape:?}")));
    }
    let rank = shape.len() as u32 - 1;
    let channels = shape[0];
    let plane: usize = shape[1..].iter().product();

    let sp = |levels: &PyramidLevels| levels.iter().map(|n| channels * n.pow(rank)).sum::<usize>();
    let ccp = |levels: &PyramidLevels| levels.iter().map(|m| m * plane).sum::<usize>();
    let ser = || {
        let groups: usize = cfg.ccp.iter().sum();
        cfg.sp.iter().map(|n| groups * n.pow(rank)).sum::<usize>()
    };

    Ok(match cfg.variant {
        Variant::SpOnly => sp(&cfg.sp),
        Variant::CcpOnly => ccp(&cfg.ccp),
        Variant::ScSer => ser(),
        Variant::ScSSer => ser() + sp(&cfg.aux),
        Variant::ScCSer => ser() + ccp(&cfg.aux),
        Variant::ScPar => sp(&cfg.sp) + ccp(&cfg.ccp),
        Variant::Twins => ser() + ccp(&cfg.ccp) + sp(&cfg.sp),
    })
}

/// Global average and global max spatial features, `[GAP, GMP]`, length `2C`.
pub fn mixed_pool(x: &FeatureMap) -> FeatureVector {
    let gap = sp_pool(x, 1, Reduction::Avg).expect("level 1 is valid");
    let gmp = sp_pool(x, 1, Reduction::Max).expect("level 1 is valid");
    concat(vec![FeatureVector::new("gap", gap.into_data()), FeatureVector::new("gmp", gmp.into_data())])
        .expect("two parts")
}
