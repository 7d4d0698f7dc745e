//! Transforms from raw observations to the copula scale.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::gp::{gp_survivor, GPParams};
use crate::numerics::simplex::{nelder_mead, SimplexOptions};
use crate::sample::{Provenance, UniformSample};

/// Fewest threshold exceedances accepted for a marginal GP fit.
pub const MIN_GP_EXCEEDANCES: usize = 20;

/// Average ranks (1-based) of `x`. Ties share the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = 0.5 * ((i + 1) + (j + 1)) as f64;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn check_data(data: &[[f64; 2]]) -> Result<()> {
    if data.len() < 2 {
        return domain(format!("need at least 2 observations, got {}", data.len()));
    }
    if let Some(i) = data.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return domain(format!("observation {i} is not finite"));
    }
    Ok(())
}

fn ranks_to_uniform(x: &[f64]) -> Vec<f64> {
    // Divide rather than multiply by the reciprocal so that u = rank/(n+1)
    // is correctly rounded.
    let denom = (x.len() + 1) as f64;
    average_ranks(x).into_iter().map(|r| r / denom).collect()
}

fn zip_columns(a: Vec<f64>, b: Vec<f64>) -> Vec<[f64; 2]> {
    a.into_iter().zip(b).map(|(u, v)| [u, v]).collect()
}

/// Empirical transform `u = rank / (n + 1)` per margin.
pub fn rank_transform(data: &[[f64; 2]]) -> Result<UniformSample> {
    check_data(data)?;
    let cols: Vec<Vec<f64>> = (0..2).map(|j| ranks_to_uniform(&column(data, j))).collect();
    let [a, b]: [Vec<f64>; 2] = cols.try_into().expect("two columns");
    UniformSample::new(zip_columns(a, b), Provenance::EmpiricalTransformed)
}

fn column(data: &[[f64; 2]], j: usize) -> Vec<f64> {
    data.iter().map(|p| p[j]).collect()
}

/// Outcome of the marginal fit used by [`semiparametric_transform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MarginTransform {
    /// Empirical below `threshold`, GP tail above it.
    Gp {
        threshold: f64,
        threshold_prob: f64,
        sigma: f64,
        shape: f64,
        n_exceed: usize,
    },
    /// The GP fit was not attempted or failed; plain ranks were used.
    EmpiricalFallback { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiparametricResult {
    pub sample: UniformSample,
    pub margins: [MarginTransform; 2],
}

impl SemiparametricResult {
    /// True when either margin fell back to ranks.
    pub fn fell_back(&self) -> bool {
        self.margins.iter().any(|m| matches!(m, MarginTransform::EmpiricalFallback { .. }))
    }
}

/// Empirical CDF below the `threshold_prob` sample quantile and a fitted GP
/// tail above it.
pub fn semiparametric_transform(data: &[[f64; 2]], threshold_prob: f64) -> Result<SemiparametricResult> {
    check_data(data)?;
    if !(threshold_prob > 0.0 && threshold_prob < 1.0) {
        return domain(format!("threshold probability must lie in (0, 1), got {threshold_prob}"));
    }
    let mut cols = Vec::with_capacity(2);
    let mut margins = Vec::with_capacity(2);
    for j in 0..2 {
        let (u, m) = transform_margin(&column(data, j), threshold_prob);
        cols.push(u);
        margins.push(m);
    }
    let b = cols.pop().expect("two columns");
    let a = cols.pop().expect("two columns");
    Ok(SemiparametricResult {
        sample: UniformSample::new(zip_columns(a, b), Provenance::EmpiricalTransformed)?,
        margins: margins.try_into().expect("two margins"),
    })
}

fn transform_margin(x: &[f64], threshold_prob: f64) -> (Vec<f64>, MarginTransform) {
    let mut u = ranks_to_uniform(x);
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let threshold = type7_quantile(&sorted, threshold_prob);
    let excess: Vec<f64> = x.iter().filter(|&&z| z > threshold).map(|&z| z - threshold).collect();
    if excess.len() < MIN_GP_EXCEEDANCES {
        let reason = format!("{} exceedances, need {MIN_GP_EXCEEDANCES}", excess.len());
        return (u, MarginTransform::EmpiricalFallback { reason });
    }
    let gp = match fit_gp(&excess) {
        Ok(gp) => gp,
        Err(reason) => return (u, MarginTransform::EmpiricalFallback { reason }),
    };
    // Keep the image inside the open interval even where a negative shape
    // puts the sample maximum at the fitted endpoint.
    let top = 1.0 - 1e-12;
    for (ui, &z) in u.iter_mut().zip(x) {
        if z >= threshold {
            let tail = gp_survivor(z - threshold, &gp).expect("valid GP and nonnegative excess");
            *ui = (1.0 - (1.0 - threshold_prob) * tail).min(top);
        }
    }
    let m = MarginTransform::Gp {
        threshold,
        threshold_prob,
        sigma: gp.sigma,
        shape: gp.shape,
        n_exceed: excess.len(),
    };
    (u, m)
}

/// Sample quantile by linear interpolation between order statistics.
pub fn type7_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let i = h.floor() as usize;
    let frac = h - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

fn gp_nll(excess: &[f64], ln_sigma: f64, shape: f64) -> f64 {
    let sigma = ln_sigma.exp();
    let n = excess.len() as f64;
    if shape.abs() < 1e-8 {
        return n * ln_sigma + excess.iter().sum::<f64>() / sigma;
    }
    let mut acc = 0.0;
    for &y in excess {
        let b = 1.0 + shape * y / sigma;
        if b <= 0.0 {
            return f64::INFINITY;
        }
        acc += b.ln();
    }
    n * ln_sigma + (1.0 + 1.0 / shape) * acc
}

/// GP maximum likelihood by simplex search over `(log σ, ξ)`.
fn fit_gp(excess: &[f64]) -> std::result::Result<GPParams, String> {
    let mean = excess.iter().sum::<f64>() / excess.len() as f64;
    if !(mean > 0.0) {
        return Err("threshold excesses are all zero".into());
    }
    let opts = SimplexOptions { initial_step: 0.1, ftol: 1e-10, xtol: 1e-7, max_evals: 2000 };
    let res = nelder_mead(|p| Ok(gp_nll(excess, p[0], p[1])), &[mean.ln(), 0.05], opts)
        .map_err(|e| e.to_string())?;
    if !res.converged || !res.fx.is_finite() {
        return Err("GP likelihood maximization did not converge".into());
    }
    GPParams::new(res.x[0].exp(), res.x[1]).map_err(|e| e.to_string())
}
