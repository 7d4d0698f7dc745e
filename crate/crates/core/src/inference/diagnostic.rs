//! Check of the independence between radius and angle in a fitted model.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::inference::transform::type7_quantile;
use crate::model::angular::AngularLaw;
use crate::model::margin::PseudoMargin;
use crate::model::params::ModelParams;
use crate::numerics::stats::kendall_tau;
use crate::sample::UniformSample;

/// Fewest retained pairs for which a rank correlation is reported.
pub const MIN_RETAINED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SvStatus {
    Ok,
    TooFewRetained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvDiagnostic {
    /// Retained `(Ŝ, V̂)` pairs, each mapped to the uniform scale by its
    /// model distribution.
    pub pairs: Vec<[f64; 2]>,
    /// Raw `(Ŝ, V̂)` for the same pairs.
    pub raw: Vec<[f64; 2]>,
    pub radial_threshold: f64,
    pub kendall_tau: Option<f64>,
    pub status: SvStatus,
}

/// Map the sample to `(A, B)` with the fitted pseudo-quantiles, form
/// `Ŝ = ‖(Â, B̂)‖` and `V̂ = Â / (Â + B̂)`, keep pairs with `Ŝ` above its
/// empirical `radial_quantile`, and measure their rank association.
pub fn sv_diagnostic(params: &ModelParams, sample: &UniformSample, radial_quantile: f64) -> Result<SvDiagnostic> {
    if !(radial_quantile >= 0.0 && radial_quantile < 1.0) {
        return domain(format!("radial quantile must lie in [0, 1), got {radial_quantile}"));
    }
    if sample.is_empty() {
        return domain("diagnostic needs a nonempty sample");
    }
    let margin = PseudoMargin::new(*params)?;
    let ps: Vec<f64> = sample.pairs().iter().flat_map(|p| [1.0 - p[0], 1.0 - p[1]]).collect();
    let pts = margin.solve_many(&ps)?;
    let norm = params.norm;
    let sv: Vec<[f64; 2]> = pts
        .chunks(2)
        .map(|c| {
            let (a, b) = (c[0].x, c[1].x);
            [norm.norm(a, b), a / (a + b)]
        })
        .collect();
    let mut radii: Vec<f64> = sv.iter().map(|p| p[0]).collect();
    radii.sort_by(f64::total_cmp);
    let threshold = type7_quantile(&radii, radial_quantile);
    let raw: Vec<[f64; 2]> = sv.into_iter().filter(|p| p[0] > threshold).collect();
    let radial = margin.radial();
    let law = params.angle()?;
    let pairs: Vec<[f64; 2]> = raw.iter().map(|p| [-radial.log_survivor(p[0]).exp_m1(), law.cdf(p[1])]).collect();
    let (tau, status) = if pairs.len() < MIN_RETAINED {
        (None, SvStatus::TooFewRetained)
    } else {
        let s: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
        let v: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
        (kendall_tau(&s, &v), SvStatus::Ok)
    };
    Ok(SvDiagnostic { pairs, raw, radial_threshold: threshold, kendall_tau: tau, status })
}
