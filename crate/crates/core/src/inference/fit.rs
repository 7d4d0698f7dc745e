//! Maximum-likelihood fitting of `(λ, α)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::likelihood::{censored_loglik, check_censor, uncensored_indices};
use crate::inference::profile::{profile_ci, Param, ProfileInterval};
use crate::inference::transform::{rank_transform, semiparametric_transform, MarginTransform};
use crate::model::norm::NormSpec;
use crate::model::params::{ModelParams, LAMBDA_MAX};
use crate::numerics::simplex::{nelder_mead, SimplexOptions};
use crate::sample::UniformSample;

/// Lower edge of the search box for `λ`. Below `-1` the pseudo-marginal
/// density is unbounded at the endpoint.
pub const LAMBDA_MIN: f64 = -1.0;
/// Search box for `log α`.
pub const LN_ALPHA_RANGE: (f64, f64) = (-4.605_170_185_988_091, 4.605_170_185_988_091);

const BOX_PENALTY: f64 = 1e4;

/// How raw data are brought to the copula scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransformKind {
    EmpiricalRanks,
    SemiparametricGp { threshold_prob: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub censor_u: f64,
    pub transform: TransformKind,
    /// `(λ, α)` starting points for the simplex search.
    pub starts: Vec<(f64, f64)>,
    pub simplex: SimplexOptions,
    /// Profile intervals for both parameters are computed at this level.
    pub ci_level: Option<f64>,
    pub norm: NormSpec,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            censor_u: 0.95,
            transform: TransformKind::EmpiricalRanks,
            starts: vec![(-0.5, 1.0), (0.0, 1.0), (0.5, 1.0), (0.3, 2.0)],
            simplex: SimplexOptions { initial_step: 0.25, ftol: 1e-7, xtol: 1e-4, max_evals: 400 },
            ci_level: Some(0.95),
            norm: NormSpec::Linf,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        check_censor(self.censor_u).map_err(|e| Error::Config(e.to_string()))?;
        if self.starts.is_empty() {
            return Err(Error::Config("at least one starting point is required".into()));
        }
        if let Some((l, a)) = self.starts.iter().find(|(l, a)| !(l.is_finite() && *a > 0.0 && a.is_finite())) {
            return Err(Error::Config(format!("invalid starting point ({l}, {a})")));
        }
        if let TransformKind::SemiparametricGp { threshold_prob } = self.transform {
            if !(threshold_prob > 0.0 && threshold_prob < 1.0) {
                return Err(Error::Config(format!("GP threshold probability must lie in (0, 1), got {threshold_prob}")));
            }
        }
        if let Some(level) = self.ci_level {
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::Config(format!("confidence level must lie in (0, 1), got {level}")));
            }
        }
        self.norm.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params_hat: ModelParams,
    pub loglik: f64,
    pub converged: bool,
    pub n: usize,
    pub n_exceed: usize,
    pub censor_u: f64,
    /// `(λ, α)` start whose search gave the reported optimum.
    pub start_used: (f64, f64),
    pub evals: usize,
    pub profile_ci: Vec<ProfileInterval>,
}

impl FitResult {
    pub fn interval(&self, which: Param) -> Option<&ProfileInterval> {
        self.profile_ci.iter().find(|c| c.param == which)
    }
}

/// Point in the search box nearest to `(λ, log α)` and the squared distance.
pub(crate) fn clamp_to_box(lambda: f64, ln_alpha: f64) -> (f64, f64, f64) {
    let l = lambda.clamp(LAMBDA_MIN, LAMBDA_MAX);
    let a = ln_alpha.clamp(LN_ALPHA_RANGE.0, LN_ALPHA_RANGE.1);
    (l, a, (l - lambda).powi(2) + (a - ln_alpha).powi(2))
}

/// Negative log-likelihood with `(λ, log α)` clamped into the search box
/// and a quadratic penalty on the distance clamped away. Evaluation
/// failures count as `+inf` so the simplex retreats from them.
pub(crate) fn objective(sample: &UniformSample, censor_u: f64, norm: NormSpec, lambda: f64, ln_alpha: f64) -> f64 {
    let (l, a, dist2) = clamp_to_box(lambda, ln_alpha);
    let value = ModelParams::with_norm(l, a.exp(), norm).and_then(|p| censored_loglik(&p, sample, censor_u));
    match value {
        Ok(ll) if ll.value.is_finite() => -ll.value + BOX_PENALTY * dist2,
        _ => f64::INFINITY,
    }
}

/// Maximize the censored likelihood from every start and keep the best.
pub fn fit(sample: &UniformSample, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let n_exceed = uncensored_indices(sample, config.censor_u).len();
    if n_exceed == 0 {
        return Err(Error::NoUncensoredPairs);
    }
    let f = |x: &[f64]| Ok(objective(sample, config.censor_u, config.norm, x[0], x[1]));
    let mut best: Option<(crate::numerics::simplex::SimplexResult, (f64, f64))> = None;
    let mut evals = 0;
    for &(l0, a0) in &config.starts {
        let res = nelder_mead(f, &[l0, a0.ln()], config.simplex)?;
        evals += res.evals;
        if best.as_ref().is_none_or(|(b, _)| res.fx < b.fx) {
            best = Some((res, (l0, a0)));
        }
    }
    let (res, start_used) = best.expect("at least one start");
    if !res.fx.is_finite() {
        return Err(Error::Optimizer("the likelihood was not finite at any point visited from any start".into()));
    }
    let (l, a, _) = clamp_to_box(res.x[0], res.x[1]);
    let params_hat = ModelParams::with_norm(l, a.exp(), config.norm)?;
    let ll = censored_loglik(&params_hat, sample, config.censor_u)?;
    let mut out = FitResult {
        params_hat,
        loglik: ll.value,
        converged: res.converged,
        n: sample.len(),
        n_exceed,
        censor_u: config.censor_u,
        start_used,
        evals,
        profile_ci: Vec::new(),
    };
    if let Some(level) = config.ci_level {
        for which in [Param::Lambda, Param::Alpha] {
            let ci = profile_ci(sample, config, &out, which, level)?;
            out.profile_ci.push(ci);
        }
    }
    Ok(out)
}

/// Transform raw observations as configured, then [`fit`].
pub fn fit_data(data: &[[f64; 2]], config: &FitConfig) -> Result<(FitResult, Option<[MarginTransform; 2]>)> {
    config.validate()?;
    match config.transform {
        TransformKind::EmpiricalRanks => Ok((fit(&rank_transform(data)?, config)?, None)),
        TransformKind::SemiparametricGp { threshold_prob } => {
            let t = semiparametric_transform(data, threshold_prob)?;
            Ok((fit(&t.sample, config)?, Some(t.margins)))
        }
    }
}
