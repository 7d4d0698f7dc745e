//! Probabilities of rectangles on the copula scale.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::copula::Copula;
use crate::model::joint::joint_box;
use crate::model::params::ModelParams;

/// Estimates below this are reported as zero.
pub const ZERO_CUTOFF: f64 = 2.0 * f64::EPSILON;

/// `(u1, v1) × (u2, v2)` with `0 <= u < v <= 1` on each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectRegion {
    pub u1: f64,
    pub v1: f64,
    pub u2: f64,
    pub v2: f64,
}

impl RectRegion {
    pub fn new(u1: f64, v1: f64, u2: f64, v2: f64) -> Result<Self> {
        let r = Self { u1, v1, u2, v2 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.u1) && unit(self.v1) && unit(self.u2) && unit(self.v2)) {
            return domain(format!("region bounds must lie in [0, 1]: {self:?}"));
        }
        if !(self.u1 < self.v1 && self.u2 < self.v2) {
            return domain(format!("region needs u1 < v1 and u2 < v2: {self:?}"));
        }
        Ok(())
    }

    pub fn whole() -> Self {
        Self { u1: 0.0, v1: 1.0, u2: 0.0, v2: 1.0 }
    }

    /// The five benchmark sets: first-axis bands `(0.05, 0.2)`, `(0.2, 0.4)`,
    /// `(0.4, 0.6)`, `(0.6, 0.8)`, `(0.8, 0.9999)`, each paired with the
    /// extreme second-axis band `(0.995, 0.99995)`.
    pub fn benchmark_sets() -> [Self; 5] {
        let bands = [(0.05, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.8), (0.8, 0.9999)];
        bands.map(|(u1, v1)| Self { u1, v1, u2: 0.995, v2: 0.99995 })
    }

    /// Named presets `set1` … `set5` and `whole`.
    pub fn preset(name: &str) -> Option<Self> {
        let sets = Self::benchmark_sets();
        match name {
            "whole" => Some(Self::whole()),
            "set1" => Some(sets[0]),
            "set2" => Some(sets[1]),
            "set3" => Some(sets[2]),
            "set4" => Some(sets[3]),
            "set5" => Some(sets[4]),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectProb {
    /// Reported probability; zero when flagged.
    pub prob: f64,
    /// Value before the zero rule was applied. For a box narrower than the
    /// cutoff this is the width bound, which already decides the flag.
    pub raw: f64,
    /// Set when `raw` was negative or below twice machine epsilon.
    pub below_2eps: bool,
}

impl RectProb {
    pub fn from_raw(raw: f64) -> Self {
        if raw < ZERO_CUTOFF {
            Self { prob: 0.0, raw, below_2eps: true }
        } else {
            Self { prob: raw.min(1.0), raw, below_2eps: false }
        }
    }
}

/// Probability of `region` under the fitted copula.
///
/// The mass is integrated directly over the box in the `(A, B)` scale
/// rather than by differencing four copula values, which would cancel
/// catastrophically for thin extreme regions.
pub fn rect_prob(params: &ModelParams, region: &RectRegion) -> Result<RectProb> {
    rect_prob_with(&Copula::new(*params)?, region)
}

pub fn rect_prob_with(copula: &Copula, region: &RectRegion) -> Result<RectProb> {
    region.validate()?;
    // A band spanning one whole axis has the other margin's mass, which is
    // uniform by construction.
    if region.u1 == 0.0 && region.v1 == 1.0 {
        return Ok(RectProb::from_raw(region.v2 - region.u2));
    }
    if region.u2 == 0.0 && region.v2 == 1.0 {
        return Ok(RectProb::from_raw(region.v1 - region.u1));
    }
    // Uniform margins bound the mass by the narrower side. Below the cutoff
    // the flag is settled, and quadrature over such a sliver is roundoff.
    let width = (region.v1 - region.u1).min(region.v2 - region.u2);
    if width < ZERO_CUTOFF {
        return Ok(RectProb::from_raw(width));
    }
    let q = |u: f64| copula.margin_quantile(u);
    let x = [q(region.u1)?, q(region.v1)?];
    let y = [q(region.u2)?, q(region.v2)?];
    Ok(RectProb::from_raw(joint_box(copula.margin(), x, y)?))
}

/// The same probability by inclusion–exclusion over copula values.
pub fn rect_prob_inclusion_exclusion(params: &ModelParams, region: &RectRegion) -> Result<f64> {
    region.validate()?;
    let c = Copula::new(*params)?;
    let r = region;
    Ok(c.cdf(r.v1, r.v2)? - c.cdf(r.u1, r.v2)? - c.cdf(r.v1, r.u2)? + c.cdf(r.u1, r.u2)?)
}
