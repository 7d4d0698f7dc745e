//! Profile-likelihood confidence intervals.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::fit::{objective, FitConfig, FitResult, LAMBDA_MIN, LN_ALPHA_RANGE};
use crate::model::params::LAMBDA_MAX;
use crate::numerics::roots::{brent_minimize, brent_root};
use crate::numerics::stats::chisq1_quantile;
use crate::sample::UniformSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Lambda,
    Alpha,
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Param::Lambda => "lambda",
            Param::Alpha => "alpha",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    /// The deviance crosses the cutoff here.
    Found,
    /// The deviance stays below the cutoff up to the edge of the search box
    /// (for `λ` the upper edge is the constraint `λ <= 1`): one-sided.
    AtParameterBound,
    /// The profile could not be evaluated on this side; `value` is the last
    /// point known to lie inside.
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileBound {
    pub value: f64,
    pub status: BoundStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileInterval {
    pub param: Param,
    pub level: f64,
    pub estimate: f64,
    pub lower: ProfileBound,
    pub upper: ProfileBound,
}

impl ProfileInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lower.value <= value && value <= self.upper.value
    }
}

/// Working coordinates: `λ` itself, or `log α`.
fn box_of(which: Param) -> (f64, f64) {
    match which {
        Param::Lambda => (LAMBDA_MIN, LAMBDA_MAX),
        Param::Alpha => LN_ALPHA_RANGE,
    }
}

fn nuisance_of(which: Param) -> Param {
    match which {
        Param::Lambda => Param::Alpha,
        Param::Alpha => Param::Lambda,
    }
}

/// Profile negative log-likelihood: the parameter fixed at `theta` (working
/// coordinates) and the other one minimized by Brent's method in a window
/// around `warm` that slides while the minimum sits on its edge.
pub fn profile_nll(
    sample: &UniformSample,
    config: &FitConfig,
    which: Param,
    theta: f64,
    warm: f64,
) -> Result<(f64, f64)> {
    let (lo_box, hi_box) = box_of(nuisance_of(which));
    let half = match which {
        Param::Lambda => 0.75,
        Param::Alpha => 0.3,
    };
    let f = |z: f64| -> Result<f64> {
        let v = match which {
            Param::Lambda => objective(sample, config.censor_u, config.norm, theta, z),
            Param::Alpha => objective(sample, config.censor_u, config.norm, z, theta),
        };
        Ok(if v.is_finite() { v } else { 1e300 })
    };
    let mut center = warm.clamp(lo_box, hi_box);
    for _ in 0..8 {
        let (a, b) = ((center - half).max(lo_box), (center + half).min(hi_box));
        let (z, v) = brent_minimize(f, a, b, center, 1e-6, 100)?;
        let edge = 1e-3 * half;
        let slide_down = z - a < edge && a > lo_box;
        let slide_up = b - z < edge && b < hi_box;
        if !(slide_down || slide_up) {
            if v >= 1e300 {
                return Err(Error::Optimizer(format!("profile likelihood not finite at {which} = {theta}")));
            }
            return Ok((v, z));
        }
        center = z;
    }
    Err(Error::Optimizer(format!("profile maximization for {which} = {theta} kept sliding")))
}

fn working(which: Param, fit: &FitResult) -> (f64, f64) {
    let p = fit.params_hat;
    match which {
        Param::Lambda => (p.lambda, p.alpha.ln()),
        Param::Alpha => (p.alpha.ln(), p.lambda),
    }
}

fn natural(which: Param, t: f64) -> f64 {
    match which {
        Param::Lambda => t,
        Param::Alpha => t.exp(),
    }
}

/// Interval `{θ : 2(ℓ_max - ℓ_profile(θ)) <= χ²₁(level)}` around the fit.
///
/// Each side is bracketed by geometrically growing steps from the estimate
/// and the crossing located by Brent's root finder on the deviance.
pub fn profile_ci(
    sample: &UniformSample,
    config: &FitConfig,
    fit: &FitResult,
    which: Param,
    level: f64,
) -> Result<ProfileInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let cutoff = 0.5 * chisq1_quantile(level);
    let (theta_hat, nuis_hat) = working(which, fit);
    let nll_max = -fit.loglik;
    let (lo_box, hi_box) = box_of(which);
    let step0 = match which {
        Param::Lambda => 0.04,
        Param::Alpha => 0.08,
    };

    let side = |dir: f64| -> ProfileBound {
        let edge = if dir < 0.0 { lo_box } else { hi_box };
        let mut inside = theta_hat;
        let mut warm = nuis_hat;
        let mut step = step0;
        loop {
            if (edge - inside) * dir <= 0.0 {
                return ProfileBound { value: natural(which, edge), status: BoundStatus::AtParameterBound };
            }
            let t = if (edge - inside - dir * step) * dir <= 0.0 { edge } else { inside + dir * step };
            let Ok((v, z)) = profile_nll(sample, config, which, t, warm) else {
                return ProfileBound { value: natural(which, inside), status: BoundStatus::Failed };
            };
            if v - nll_max > cutoff {
                let outside = t;
                let mut w = warm;
                let g = |s: f64| -> Result<f64> {
                    let (v, z) = profile_nll(sample, config, which, s, w)?;
                    w = z;
                    Ok(v - nll_max - cutoff)
                };
                return match brent_root(g, inside, outside, 1e-9, 1e-5, 100) {
                    Ok(r) => ProfileBound { value: natural(which, r), status: BoundStatus::Found },
                    Err(_) => ProfileBound { value: natural(which, inside), status: BoundStatus::Failed },
                };
            }
            inside = t;
            warm = z;
            step *= 1.6;
        }
    };
    let lower = side(-1.0);
    let upper = side(1.0);
    Ok(ProfileInterval { param: which, level, estimate: natural(which, theta_hat), lower, upper })
}
