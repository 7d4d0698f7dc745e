//! Monotone interpolation table for the pseudo-marginal survivor.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::margin::PseudoMargin;

const NODES: usize = 2048;
/// Table covers exceedance probabilities from `1 - UPPER_GAP` down to `LOWER_P`.
const UPPER_GAP: f64 = 1e-10;
const LOWER_P: f64 = 1e-15;

/// Cubic Hermite table of `log S` against `ξ = log x` (or
/// `log{x / (Λ - x)}` for a finite endpoint `Λ`), with exact node slopes
/// from the density passed through the Fritsch–Carlson limiter so the
/// interpolant stays monotone.
#[derive(Debug, Clone)]
pub(crate) struct SurvivorTable {
    endpoint: f64,
    xi0: f64,
    step: f64,
    ln_s: Vec<f64>,
    slope: Vec<f64>,
}

impl SurvivorTable {
    pub fn build(margin: &PseudoMargin) -> Result<Self> {
        let endpoint = margin.endpoint();
        let to_xi = |x: f64| if endpoint.is_finite() { (x / (endpoint - x)).ln() } else { x.ln() };
        let lo = margin.solve(1.0 - UPPER_GAP, None)?.x;
        let hi = margin.solve(LOWER_P, None)?.x;
        let (xi0, xi1) = (to_xi(lo), to_xi(hi));
        if !(xi1 > xi0) {
            return Err(Error::Config(format!("degenerate survivor table range [{lo}, {hi}]")));
        }
        let step = (xi1 - xi0) / (NODES - 1) as f64;
        let nodes: Vec<(f64, f64)> = (0..NODES)
            .into_par_iter()
            .map(|i| {
                let xi = xi0 + step * i as f64;
                let (x, dx_dxi) = from_xi(xi, endpoint);
                let (s, f) = margin.survivor_density(x)?;
                if !(s > 0.0) {
                    return Err(Error::Config(format!("survivor underflow at table node x = {x}")));
                }
                Ok((s.ln(), -f / s * dx_dxi))
            })
            .collect::<Result<_>>()?;
        let ln_s: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let mut slope: Vec<f64> = nodes.iter().map(|n| n.1.min(0.0)).collect();
        limit_slopes(&ln_s, &mut slope, step);
        Ok(Self { endpoint, xi0, step, ln_s, slope })
    }

    /// Interpolated `log S(x)`, or `None` outside the tabulated range.
    pub fn ln_survivor(&self, x: f64) -> Option<f64> {
        if !(x > 0.0 && x < self.endpoint) {
            return None;
        }
        let xi = if self.endpoint.is_finite() { (x / (self.endpoint - x)).ln() } else { x.ln() };
        let pos = (xi - self.xi0) / self.step;
        if !(pos >= 0.0 && pos <= (NODES - 1) as f64) {
            return None;
        }
        let k = (pos.floor() as usize).min(NODES - 2);
        let t = pos - k as f64;
        let (y0, y1) = (self.ln_s[k], self.ln_s[k + 1]);
        let (m0, m1) = (self.slope[k] * self.step, self.slope[k + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        Some(
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                + (t3 - 2.0 * t2 + t) * m0
                + (-2.0 * t3 + 3.0 * t2) * y1
                + (t3 - t2) * m1,
        )
    }
}

fn from_xi(xi: f64, endpoint: f64) -> (f64, f64) {
    if endpoint.is_finite() {
        // x = Λ e^ξ / (1 + e^ξ)
        let x = if xi > 0.0 { endpoint / (1.0 + (-xi).exp()) } else { endpoint * xi.exp() / (1.0 + xi.exp()) };
        (x, x * (endpoint - x) / endpoint)
    } else {
        let x = xi.exp();
        (x, x)
    }
}

fn limit_slopes(y: &[f64], m: &mut [f64], h: f64) {
    for k in 0..y.len() - 1 {
        let delta = (y[k + 1] - y[k]) / h;
        if delta == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta;
        let b = m[k + 1] / delta;
        let r = a * a + b * b;
        if r > 9.0 {
            let t = 3.0 / r.sqrt();
            m[k] = t * a * delta;
            m[k + 1] = t * b * delta;
        }
    }
}
