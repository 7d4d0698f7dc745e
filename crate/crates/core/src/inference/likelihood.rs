//! Censored log-likelihood on the copula scale.
//!
//! Pairs with `max(u1, u2) > u` contribute `log c(u1, u2)`; the remaining
//! ones contribute the corner mass `log C(u, u)` each.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::joint::{joint_survivor_jet, joint_survivor_with, ln_joint_density, ln_joint_density_grad};
use crate::model::margin::{MarginPoint, PseudoMargin};
use crate::model::params::ModelParams;
use crate::sample::UniformSample;

/// Which term made the log-likelihood non-finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonFinite {
    /// Density term of the pair with this index in the sample.
    Pair(usize),
    /// The censored corner mass `C(u, u)`.
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLik {
    /// `-inf` when some term is not finite; see `nonfinite`.
    pub value: f64,
    pub n_exceed: usize,
    pub n_censored: usize,
    pub nonfinite: Option<NonFinite>,
}

pub(crate) fn check_censor(censor_u: f64) -> Result<()> {
    if !(censor_u > 0.0 && censor_u < 1.0) {
        return domain(format!("censoring threshold must lie in (0, 1), got {censor_u}"));
    }
    Ok(())
}

/// Indices of pairs with `max(u1, u2) > censor_u`.
pub fn uncensored_indices(sample: &UniformSample, censor_u: f64) -> Vec<usize> {
    sample
        .pairs()
        .iter()
        .enumerate()
        .filter(|(_, p)| p[0].max(p[1]) > censor_u)
        .map(|(i, _)| i)
        .collect()
}

struct Solved {
    margin: PseudoMargin,
    idx: Vec<usize>,
    // Quantile points: 2k entries for the k uncensored pairs, then the corner.
    points: Vec<MarginPoint>,
}

impl Solved {
    fn new(params: &ModelParams, sample: &UniformSample, censor_u: f64) -> Result<Self> {
        check_censor(censor_u)?;
        if sample.is_empty() {
            return domain("censored likelihood needs a nonempty sample");
        }
        let margin = PseudoMargin::new(*params)?;
        let idx = uncensored_indices(sample, censor_u);
        let mut ps: Vec<f64> = Vec::with_capacity(2 * idx.len() + 1);
        for &i in &idx {
            let [u1, u2] = sample.pairs()[i];
            ps.push(1.0 - u1);
            ps.push(1.0 - u2);
        }
        ps.push(1.0 - censor_u);
        let points = margin.solve_many(&ps)?;
        Ok(Self { margin, idx, points })
    }

    fn corner(&self) -> MarginPoint {
        *self.points.last().expect("corner point")
    }

    fn pair(&self, k: usize) -> (MarginPoint, MarginPoint) {
        (self.points[2 * k], self.points[2 * k + 1])
    }
}

fn first_nonfinite(idx: &[usize], terms: &[f64]) -> Option<NonFinite> {
    terms.iter().position(|t| !t.is_finite()).map(|k| NonFinite::Pair(idx[k]))
}

/// Censored log-likelihood of `sample` at `params`.
pub fn censored_loglik(params: &ModelParams, sample: &UniformSample, censor_u: f64) -> Result<LogLik> {
    let s = Solved::new(params, sample, censor_u)?;
    let terms: Vec<f64> = (0..s.idx.len())
        .into_par_iter()
        .map(|k| {
            let (a, b) = s.pair(k);
            Ok(ln_joint_density(&s.margin, a.x, b.x)? - a.density.ln() - b.density.ln())
        })
        .collect::<Result<_>>()?;
    let n_censored = sample.len() - s.idx.len();
    let mut out = LogLik { value: 0.0, n_exceed: s.idx.len(), n_censored, nonfinite: None };
    if let Some(nf) = first_nonfinite(&s.idx, &terms) {
        out.value = f64::NEG_INFINITY;
        out.nonfinite = Some(nf);
        return Ok(out);
    }
    out.value = terms.iter().sum();
    if n_censored > 0 {
        let q = s.corner().x;
        let ln_corner = (2.0 * censor_u - 1.0 + joint_survivor_with(&s.margin, q, q)?).ln();
        if !ln_corner.is_finite() {
            out.value = f64::NEG_INFINITY;
            out.nonfinite = Some(NonFinite::Corner);
            return Ok(out);
        }
        out.value += n_censored as f64 * ln_corner;
    }
    Ok(out)
}

/// Quantile sensitivity `∂x/∂θ` and `∂ log f(x(θ))/∂θ` for `θ = (λ, α)`
/// at a point with `S(x) = p` held fixed.
fn quantile_sensitivity(margin: &PseudoMargin, x: f64) -> Result<([f64; 2], [f64; 2])> {
    let j = margin.jet(x)?;
    // S(x(θ); θ) = p and ∂S/∂x = -f give x_θ = S_θ / f.
    let dx = [j.s_lambda / j.f, j.s_alpha / j.f];
    let dlnf = [(j.f_lambda + j.f_x * dx[0]) / j.f, (j.f_alpha + j.f_x * dx[1]) / j.f];
    Ok((dx, dlnf))
}

/// [`censored_loglik`] together with its gradient in `(λ, α)`.
///
/// Quantiles move with the parameters, so every term is differentiated
/// through `x(θ)` as well as directly.
pub fn censored_loglik_grad(params: &ModelParams, sample: &UniformSample, censor_u: f64) -> Result<(LogLik, [f64; 2])> {
    let s = Solved::new(params, sample, censor_u)?;
    let terms: Vec<[f64; 3]> = (0..s.idx.len())
        .into_par_iter()
        .map(|k| {
            let (a, b) = s.pair(k);
            let g = ln_joint_density_grad(&s.margin, a.x, b.x)?;
            if !g[0].is_finite() {
                return Ok([g[0], 0.0, 0.0]);
            }
            let (dxa, dfa) = quantile_sensitivity(&s.margin, a.x)?;
            let (dxb, dfb) = quantile_sensitivity(&s.margin, b.x)?;
            let value = g[0] - a.density.ln() - b.density.ln();
            let mut out = [value, 0.0, 0.0];
            for t in 0..2 {
                out[t + 1] = g[1 + t] + g[3] * dxa[t] + g[4] * dxb[t] - dfa[t] - dfb[t];
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let n_censored = sample.len() - s.idx.len();
    let mut out = LogLik { value: 0.0, n_exceed: s.idx.len(), n_censored, nonfinite: None };
    let values: Vec<f64> = terms.iter().map(|t| t[0]).collect();
    if let Some(nf) = first_nonfinite(&s.idx, &values) {
        out.value = f64::NEG_INFINITY;
        out.nonfinite = Some(nf);
        return Ok((out, [f64::NAN; 2]));
    }
    let mut grad = [0.0; 2];
    for t in &terms {
        grad[0] += t[1];
        grad[1] += t[2];
    }
    out.value = values.iter().sum();
    if n_censored > 0 {
        let q = s.corner().x;
        let jet = joint_survivor_jet(&s.margin, q, q)?;
        let corner = 2.0 * censor_u - 1.0 + jet[0];
        if !(corner > 0.0) {
            out.value = f64::NEG_INFINITY;
            out.nonfinite = Some(NonFinite::Corner);
            return Ok((out, [f64::NAN; 2]));
        }
        let (dq, _) = quantile_sensitivity(&s.margin, q)?;
        let n = n_censored as f64;
        out.value += n * corner.ln();
        for t in 0..2 {
            // dC(u,u)/dθ = ∂θ S_AB + (∂x + ∂y) S_AB · q_θ
            grad[t] += n * (jet[3 + t] + (jet[1] + jet[2]) * dq[t]) / corner;
        }
    }
    Ok((out, grad))
}
