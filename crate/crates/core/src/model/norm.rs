//! Angular norms on the positive quadrant.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::angular::AngularLaw;

/// Norm used to place the angular variable on the unit sphere.
///
/// Every supported norm is symmetric, dominates the sup norm, and agrees
/// with it on the axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormSpec {
    #[default]
    Linf,
    Lp { p: f64 },
}

impl NormSpec {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p >= 1.0) || p.is_nan() {
            return domain(format!("Lp norm needs p >= 1, got {p}"));
        }
        if p.is_infinite() {
            return Ok(Self::Linf);
        }
        Ok(Self::Lp { p })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Linf => Ok(()),
            Self::Lp { p } => Self::lp(p).map(|_| ()),
        }
    }

    /// `‖(x, y)‖` for `x, y >= 0`.
    #[inline]
    pub fn norm(&self, x: f64, y: f64) -> f64 {
        let hi = x.max(y);
        match *self {
            Self::Linf => hi,
            Self::Lp { p } => {
                if hi == 0.0 || hi.is_infinite() {
                    return hi;
                }
                let lo = x.min(y);
                hi * (1.0 + (lo / hi).powf(p)).powf(1.0 / p)
            }
        }
    }

    /// `∂‖(x, y)‖/∂x`; for the sup norm the tie `x = y` takes the average
    /// of the one-sided derivatives.
    #[inline]
    pub fn d_norm_dx(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::Linf => {
                if x > y {
                    1.0
                } else if x < y {
                    0.0
                } else {
                    0.5
                }
            }
            Self::Lp { p } => {
                let n = self.norm(x, y);
                if n == 0.0 {
                    0.0
                } else {
                    (x / n).powf(p - 1.0)
                }
            }
        }
    }

    /// `‖(1, 1)‖`; equal to one only for the sup norm.
    pub fn diagonal(&self) -> f64 {
        self.norm(1.0, 1.0)
    }

    /// `τ(v) = ‖(v, 1-v)‖ / v`, taking the complement `w = 1 - v` explicitly.
    #[inline]
    pub fn tau(&self, v: f64, w: f64) -> f64 {
        match *self {
            Self::Linf => {
                if v >= w {
                    1.0
                } else {
                    w / v
                }
            }
            Self::Lp { .. } => self.norm(v, w) / v,
        }
    }

    /// `τ(lo) - τ(v)` for `lo <= v < v'`, from the exact offset
    /// `gap = v - lo`, so that it keeps full relative precision as `v`
    /// approaches `lo`.
    pub fn tau_drop(&self, lo: f64, v: f64, gap: f64) -> f64 {
        // w/v falls by gap / (v lo) on the decreasing branch
        let delta = gap / (v * lo);
        match *self {
            Self::Linf => delta,
            Self::Lp { p } => {
                let rho0 = (1.0 - lo) / lo;
                let tau0 = self.tau(lo, 1.0 - lo);
                // 1 + ρ^p falls by ρ0^p {1 - (1 - δ/ρ0)^p}
                let drop = -rho0.powf(p) * (p * (-delta / rho0).ln_1p()).exp_m1();
                let a0 = 1.0 + rho0.powf(p);
                -tau0 * ((-drop / a0).ln_1p() / p).exp_m1()
            }
        }
    }

    /// Right end of the interval on which `τ` strictly decreases.
    pub fn v_prime(&self) -> f64 {
        match self {
            Self::Linf => 0.5,
            Self::Lp { .. } => 1.0,
        }
    }

    /// Start of the interval on which `τ` equals one.
    pub fn v_dprime(&self) -> f64 {
        1.0
    }

    /// The `v <= v'` solution of `τ(v) = t`, for `t >= τ(v')`.
    ///
    /// Returns 0 for infinite `t` and `v'` when `t` lies below the range of
    /// the decreasing branch.
    pub fn tau_level_left(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return 0.0;
        }
        match *self {
            Self::Linf => {
                if t <= 1.0 {
                    0.5
                } else {
                    1.0 / (1.0 + t)
                }
            }
            Self::Lp { p } => {
                if t <= 1.0 {
                    1.0
                } else {
                    // (t^p - 1)^{1/p} = t (1 - t^{-p})^{1/p}
                    let ratio = t * ((-(-p * t.ln()).exp()).ln_1p() / p).exp();
                    1.0 / (1.0 + ratio)
                }
            }
        }
    }

    /// Probability that `V` falls in `[v', v'']`.
    pub fn m_plus<L: AngularLaw + ?Sized>(&self, law: &L) -> f64 {
        law.cdf(self.v_dprime()) - law.cdf(self.v_prime())
    }

    /// Probability that `V` falls in `[1 - v'', 1 - v']`.
    pub fn m_minus<L: AngularLaw + ?Sized>(&self, law: &L) -> f64 {
        law.cdf(1.0 - self.v_prime()) - law.cdf(1.0 - self.v_dprime())
    }
}

/// `(v, 1-v) / ‖(v, 1-v)‖`.
pub fn angular_pair(v: f64, norm: &NormSpec) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&v) {
        return domain(format!("angle must lie in [0, 1], got {v}"));
    }
    let w = 1.0 - v;
    let n = norm.norm(v, w);
    Ok((v / n, w / n))
}
