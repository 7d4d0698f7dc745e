//! Reference rectangle probabilities for the simulation structures.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::inference::rect::{rect_prob, RectRegion};
use crate::model::params::ModelParams;
use crate::numerics::quadrature::{integrate_scalar, Tolerance};
use crate::numerics::stats::{norm_interval, norm_pdf, norm_quantile};
use crate::simulate::samplers::Structure;

const TRUTH_TOL: Tolerance = Tolerance { rel: 1e-11, abs: 0.0, max_intervals: 2000 };

/// Exact probability of `region` under `structure`.
pub fn truth_rect(structure: &Structure, region: &RectRegion) -> Result<f64> {
    structure.validate()?;
    region.validate()?;
    // Every structure has uniform margins, so a band spanning a whole axis
    // has exactly the other side's width.
    if region.u1 == 0.0 && region.v1 == 1.0 {
        return Ok(region.v2 - region.u2);
    }
    if region.u2 == 0.0 && region.v2 == 1.0 {
        return Ok(region.v1 - region.u1);
    }
    match *structure {
        Structure::NewModel { lambda, alpha } => Ok(rect_prob(&ModelParams::new(lambda, alpha)?, region)?.raw),
        Structure::Logistic { dep } => logistic_rect(dep, region),
        Structure::InvertedLogistic { dep } => {
            let r = region;
            logistic_rect(dep, &RectRegion { u1: 1.0 - r.v1, v1: 1.0 - r.u1, u2: 1.0 - r.v2, v2: 1.0 - r.u2 })
        }
        Structure::GaussianCopula { rho } => gaussian_rect(rho, region),
    }
}

/// `log ∂C/∂u (u, v)` for the logistic copula with `x = -log u`, `y = -log v`:
/// `-x{(1+r)^{dep} - 1} + (dep - 1) log(1+r)` with `r = (y/x)^{1/dep}`.
fn logistic_ln_conditional(dep: f64, x: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if y.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let ln_r = (y.ln() - x.ln()) / dep;
    // log(1 + r) without overflow for large r.
    let l1p = if ln_r > 30.0 { ln_r + (-ln_r).exp().ln_1p() } else { ln_r.exp().ln_1p() };
    -x * (dep * l1p).exp_m1() + (dep - 1.0) * l1p
}

/// `∫_{u1}^{v1} P(u2 < V <= v2 | U = u) du`, with the conditional
/// difference formed as `e^{g1} expm1(g2 - g1)` so it keeps full relative
/// accuracy whether the two conditional probabilities are near 0 or near 1.
fn logistic_rect(dep: f64, r: &RectRegion) -> Result<f64> {
    let (y_lo, y_hi) = (-r.v2.ln(), -r.u2.ln());
    let p = integrate_scalar(
        |u: f64| {
            let x = -u.ln();
            let g1 = logistic_ln_conditional(dep, x, y_hi);
            let g2 = logistic_ln_conditional(dep, x, y_lo);
            if g1 == f64::NEG_INFINITY {
                return g2.exp();
            }
            g1.exp() * (g2 - g1).exp_m1()
        },
        &[r.u1, r.v1],
        TRUTH_TOL,
    )?;
    Ok(p.max(0.0))
}

/// `∫ φ(z) P(a2 < ρz + √(1-ρ²) Z' <= b2) dz` over `z ∈ (a1, b1]`.
fn gaussian_rect(rho: f64, r: &RectRegion) -> Result<f64> {
    let q = |u: f64| norm_quantile(u);
    let (a1, b1, a2, b2) = (q(r.u1), q(r.v1), q(r.u2), q(r.v2));
    let s = (1.0 - rho * rho).sqrt();
    // Infinite limits are cut where the outer normal mass is negligible.
    let (lo, hi) = (a1.max(-40.0), b1.min(40.0));
    let inner = |z: f64| norm_pdf(z) * norm_interval((a2 - rho * z) / s, (b2 - rho * z) / s);
    // The inner probability changes fastest around where its limits cross 0.
    let mut cuts: Vec<f64> = [a2 / rho, b2 / rho].into_iter().filter(|c| c.is_finite() && *c > lo && *c < hi).collect();
    cuts.sort_by(f64::total_cmp);
    let mut pts = vec![lo];
    pts.extend(cuts);
    pts.push(hi);
    Ok(integrate_scalar(inner, &pts, TRUTH_TOL)?.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub prob: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Monte Carlo estimates of several regions from one stream of `draws`
/// pairs, generated in blocks on consecutive streams of `seed`.
pub fn monte_carlo_rects(structure: &Structure, regions: &[RectRegion], draws: usize, seed: u64) -> Result<Vec<McEstimate>> {
    const BLOCK: usize = 1 << 20;
    let mut hits = vec![0u64; regions.len()];
    let mut done = 0;
    let mut stream = 0;
    while done < draws {
        let m = BLOCK.min(draws - done);
        let sample = structure.sample(m, seed, stream)?;
        for p in sample.pairs() {
            for (h, r) in hits.iter_mut().zip(regions) {
                if p[0] > r.u1 && p[0] <= r.v1 && p[1] > r.u2 && p[1] <= r.v2 {
                    *h += 1;
                }
            }
        }
        done += m;
        stream += 1;
    }
    let n = draws as f64;
    Ok(hits
        .into_iter()
        .map(|h| {
            let p = h as f64 / n;
            McEstimate { prob: p, std_error: (p * (1.0 - p) / n).sqrt(), draws }
        })
        .collect())
}

/// Bivariate normal CDF `Φ₂(x, y; ρ)` by integrating the density over the
/// correlation from 0 (Plackett's identity). Independent of
/// [`truth_rect`]; used to cross-check it.
pub fn bivariate_normal_cdf(x: f64, y: f64, rho: f64) -> Result<f64> {
    use crate::numerics::stats::norm_cdf;
    let base = norm_cdf(x) * norm_cdf(y);
    if rho == 0.0 {
        return Ok(base);
    }
    // The quadrature wants an increasing range; the integral changes sign
    // with it.
    let (lo, hi, sign) = if rho > 0.0 { (0.0, rho, 1.0) } else { (rho, 0.0, -1.0) };
    let d = integrate_scalar(
        |r: f64| {
            let s2 = 1.0 - r * r;
            (-(x * x - 2.0 * r * x * y + y * y) / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2.sqrt())
        },
        &[lo, hi],
        TRUTH_TOL,
    )?;
    Ok(base + sign * d)
}
