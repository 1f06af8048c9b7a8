use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// An ascending set of pyramid levels. Empty means the operator is absent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PyramidLevels(Vec<usize>);

impl PyramidLevels {
    pub fn new(levels: Vec<usize>) -> Result<Self> {
        if levels.contains(&0) {
            return Err(contract("pyramid levels must be >= 1 (use an empty set for an absent operator)"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(contract(format!("pyramid levels must be strictly ascending: {levels:?}")));
        }
        Ok(Self(levels))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn single(level: usize) -> Result<Self> {
        Self::new(vec![level])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl TryFrom<Vec<usize>> for PyramidLevels {
    type Error = Error;

    fn try_from(levels: Vec<usize>) -> Result<Self> {
        Self::new(levels)
    }
}

impl From<PyramidLevels> for Vec<usize> {
    fn from(levels: PyramidLevels) -> Self {
        levels.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    #[default]
    #[serde(alias = "average", alias = "mean")]
    Avg,
    Max,
}

/// Which pooling composition to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Spatial (pyramid) pooling alone: GAP at level 1, SPP for several levels.
    SpOnly,
    /// Cross-channel (pyramid) pooling alone: CAP at level 1, CCPP for several levels.
    CcpOnly,
    /// `CCP(SP(X))`.
    ScSer,
    /// `[CCP(SP(X)), SP_aux(X)]`.
    ScSSer,
    /// `[CCP(SP(X)), CCP_aux(X)]`.
    ScCSer,
    /// `[SP(X), CCP(X)]`.
    ScPar,
    /// `[SP(CCP(X)), CCP(X), SP(X)]`.
    Twins,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::SpOnly => "sp-only",
            Variant::CcpOnly => "ccp-only",
            Variant::ScSer => "sc-ser",
            Variant::ScSSer => "sc-s-ser",
            Variant::ScCSer => "sc-c-ser",
            Variant::ScPar => "sc-par",
            Variant::Twins => "twins",
        };
        f.write_str(s)
    }
}

/// A validated pooling configuration.
///
/// JSON form: `{"variant": "sc-c-ser", "sp": [4], "ccp": [2], "aux": [3], "reduction": "avg"}`.
/// Missing level lists default to empty, missing reduction to `avg`; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct DvppConfig {
    pub(crate) variant: Variant,
    pub(crate) sp: PyramidLevels,
    pub(crate) ccp: PyramidLevels,
    pub(crate) aux: PyramidLevels,
    pub(crate) reduction: Reduction,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    variant: Variant,
    #[serde(default)]
    sp: PyramidLevels,
    #[serde(default)]
    ccp: PyramidLevels,
    #[serde(default)]
    aux: PyramidLevels,
    #[serde(default)]
    reduction: Reduction,
}

impl TryFrom<RawConfig> for DvppConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        Self::new(raw.variant, raw.sp, raw.ccp, raw.aux, raw.reduction)
    }
}

impl DvppConfig {
    pub fn new(
        variant: Variant,
        sp: PyramidLevels,
        ccp: PyramidLevels,
        aux: PyramidLevels,
        reduction: Reduction,
    ) -> Result<Self> {
        let need = |levels: &PyramidLevels, name: &str, wanted: bool| {
            if levels.is_empty() == wanted {
                let msg = if wanted { "requires non-empty" } else { "does not use" };
                Err(contract(format!("variant {variant} {msg} {name} levels")))
            } else {
                Ok(())
            }
        };
        let (uses_sp, uses_ccp, uses_aux) = match variant {
            Variant::SpOnly => (true, false, false),
            Variant::CcpOnly => (false, true, false),
            Variant::ScSer | Variant::ScPar | Variant::Twins => (true, true, false),
            Variant::ScSSer | Variant::ScCSer => (true, true, true),
        };
        need(&sp, "sp", uses_sp)?;
        need(&ccp, "ccp", uses_ccp)?;
        need(&aux, "aux", uses_aux)?;
        Ok(Self { variant, sp, ccp, aux, reduction })
    }

    /// Average-pooling config from plain level lists.
    pub fn avg(variant: Variant, sp: &[usize], ccp: &[usize], aux: &[usize]) -> Result<Self> {
        Self::new(
            variant,
            PyramidLevels::new(sp.to_vec())?,
            PyramidLevels::new(ccp.to_vec())?,
            PyramidLevels::new(aux.to_vec())?,
            Reduction::Avg,
        )
    }

    /// Maps an `(SP, CCP)` setting pair of the serial ablation grid onto a
    /// config, `0` meaning the operator is absent: `(1, 0)` is GAP, `(0, 1)`
    /// is CAP, `(n, m)` is the serial composition.
    pub fn from_setting(sp: usize, ccp: usize) -> Result<Self> {
        let levels = |n: usize| if n == 0 { Ok(PyramidLevels::empty()) } else { PyramidLevels::single(n) };
        let variant = match (sp, ccp) {
            (0, 0) => return Err(contract("setting (0, 0) pools nothing")),
            (_, 0) => Variant::SpOnly,
            (0, _) => Variant::CcpOnly,
            _ => Variant::ScSer,
        };
        Self::new(variant, levels(sp)?, levels(ccp)?, PyramidLevels::empty(), Reduction::Avg)
    }

    /// Serial composition with SP level 3 and CCP level 4.
    pub fn representative_ser() -> Self {
        Self::avg(Variant::ScSer, &[3], &[4], &[]).expect("static config is valid")
    }

    /// Serial composition plus an extra CCP branch, levels SP 4, CCP 2, extra CCP 3.
    pub fn representative_c_ser() -> Self {
        Self::avg(Variant::ScCSer, &[4], &[2], &[3]).expect("static config is valid")
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn sp(&self) -> &PyramidLevels {
        &self.sp
    }

    pub fn ccp(&self) -> &PyramidLevels {
        &self.ccp
    }

    pub fn aux(&self) -> &PyramidLevels {
        &self.aux
    }

    pub fn reduction(&self) -> Reduction {
        self.reduction
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
