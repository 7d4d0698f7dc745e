//! Extremal-dependence summaries of the model and their empirical
//! counterparts.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::model::angular::{integrate_angle, AngularLaw, BetaAngle};
use crate::model::gp::LAMBDA_ZERO;
use crate::model::margin::{peak_cuts, radial_moment, MARGIN_TOL};
use crate::model::{Copula, ModelParams, NormSpec};
use crate::numerics::stats::norm_quantile;
use crate::numerics::Tolerance;
use crate::sample::UniformSample;

/// Above this level the model's `χ(u)` and `χ̄(u)` are flagged as unreliable.
pub const UNSTABLE_U: f64 = 1.0 - 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepClass {
    AsymptoticDependence,
    AsymptoticIndependence,
}

/// A coefficient that some parameter/norm combinations leave undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coefficient {
    Value(f64),
    IllDefined,
}

impl Coefficient {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(*v),
            Self::IllDefined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceSummary {
    pub chi: f64,
    pub eta: Coefficient,
    pub dep_class: DepClass,
}

fn is_zero(lambda: f64) -> bool {
    lambda.abs() < LAMBDA_ZERO
}

pub fn dependence_class(params: &ModelParams) -> DepClass {
    if params.lambda > 0.0 && !is_zero(params.lambda) {
        DepClass::AsymptoticDependence
    } else {
        DepClass::AsymptoticIndependence
    }
}

pub fn summary(params: &ModelParams) -> Result<DependenceSummary> {
    let dep_class = dependence_class(params);
    let chi = match dep_class {
        DepClass::AsymptoticDependence => chi_lambda(params)?,
        DepClass::AsymptoticIndependence => 0.0,
    };
    Ok(DependenceSummary { chi, eta: eta(params), dep_class })
}

fn require_dependence(params: &ModelParams, what: &str) -> Result<()> {
    params.validate()?;
    if dependence_class(params) != DepClass::AsymptoticDependence {
        return domain(format!("{what} needs lambda > 0, got {}", params.lambda));
    }
    Ok(())
}

/// `χ = E[min(V1^{1/λ}, V2^{1/λ})] / E(V1^{1/λ})` for `λ > 0`.
pub fn chi_lambda(params: &ModelParams) -> Result<f64> {
    require_dependence(params, "chi_lambda")?;
    let law = params.angle()?;
    let norm = params.norm;
    let power = 1.0 / params.lambda;
    let m = radial_moment(&law, &norm, power)?;
    // min(V1, V2) peaks on the diagonal v = 1/2
    let mut cuts = peak_cuts(0.5, 1.0 / power);
    cuts.push(norm.v_prime());
    cuts.push(1.0 - norm.v_prime());
    let [num] = integrate_angle(
        &law,
        |v, w| {
            let t = norm.tau(v, w).max(norm.tau(w, v));
            [(-power * t.ln()).exp()]
        },
        0.0,
        1.0,
        &cuts,
        MARGIN_TOL,
    )?;
    Ok((num / m).min(1.0))
}

/// Coefficient of tail dependence `η`.
pub fn eta(params: &ModelParams) -> Coefficient {
    let diag = params.norm.diagonal();
    let l = params.lambda;
    if is_zero(l) {
        Coefficient::Value(1.0 / diag)
    } else if l > 0.0 {
        Coefficient::Value(1.0)
    } else if diag == 1.0 {
        Coefficient::Value(1.0 / (1.0 - l))
    } else {
        Coefficient::IllDefined
    }
}

/// Growth rates `(β, γ)` for the joint-survivor decay exponent `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaQuery {
    pub beta: f64,
    pub gamma: f64,
}

impl KappaQuery {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0 && gamma > 0.0 && beta.is_finite() && gamma.is_finite()) {
            return domain(format!("kappa needs beta, gamma > 0, got ({beta}, {gamma})"));
        }
        Ok(Self { beta, gamma })
    }

    pub fn omega(&self) -> f64 {
        self.beta / (self.beta + self.gamma)
    }
}

/// `κ(β, γ)`, homogeneous of order one.
pub fn kappa(q: &KappaQuery, params: &ModelParams) -> Coefficient {
    let (b, g) = (q.beta, q.gamma);
    let l = params.lambda;
    let norm = params.norm;
    if is_zero(l) {
        let vp = norm.v_prime();
        let omega = q.omega();
        if omega >= 1.0 - vp && omega <= vp {
            Coefficient::Value(norm.norm(b, g))
        } else {
            Coefficient::Value(b.max(g))
        }
    } else if l > 0.0 {
        Coefficient::Value(b.max(g))
    } else if norm.diagonal() == 1.0 {
        Coefficient::Value((1.0 + l) * b.max(g) - l * (b + g))
    } else {
        Coefficient::IllDefined
    }
}

fn check_ray(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("ray must lie in (0, 1), got {q}"));
    }
    Ok(())
}

/// Ray dependence function for `λ > 0`:
/// `E[min{V1^{1/λ} a, V2^{1/λ} / a}] / (χ E V1^{1/λ})` with `a = ((1-q)/q)^{1/2}`.
pub fn ray_dependence_ad(q: f64, params: &ModelParams) -> Result<f64> {
    require_dependence(params, "ray_dependence_ad")?;
    check_ray(q)?;
    let law = params.angle()?;
    let norm = params.norm;
    let power = 1.0 / params.lambda;
    let ln_a = 0.5 * ((1.0 - q) / q).ln();
    // V1/V2 = v/(1-v), so the two terms cross at v/(1-v) = (q/(1-q))^λ.
    let rho_l = (params.lambda * (q / (1.0 - q)).ln()).exp();
    let cross = rho_l / (1.0 + rho_l);
    let mut cuts = peak_cuts(cross, 1.0 / power);
    cuts.extend([norm.v_prime(), 1.0 - norm.v_prime()]);
    let [num] = integrate_angle(
        &law,
        |v, w| {
            let a = -power * norm.tau(v, w).ln() + ln_a;
            let b = -power * norm.tau(w, v).ln() - ln_a;
            [a.min(b).exp()]
        },
        0.0,
        1.0,
        &cuts,
        MARGIN_TOL,
    )?;
    let m = radial_moment(&law, &norm, power)?;
    Ok(num / (m * chi_lambda(params)?))
}

/// Ray dependence function for `λ < 0` under the sup-type norm
/// (`‖(1,1)‖ = 1`), in closed form from the angular masses `m₊`, `m₋`.
pub fn ray_dependence_ai(q: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    check_ray(q)?;
    let l = params.lambda;
    if !(l < 0.0) || is_zero(l) {
        return domain(format!("ray_dependence_ai needs lambda < 0, got {l}"));
    }
    if params.norm.diagonal() != 1.0 {
        return domain("ray_dependence_ai needs a norm with ‖(1,1)‖ = 1");
    }
    let law = params.angle()?;
    if !(law.density(0.5) > 0.0) {
        return domain("angular density must be positive at 1/2");
    }
    let mp = params.norm.m_plus(&law);
    let mm = params.norm.m_minus(&law);
    let c = (1.0 + l) / (1.0 - l);
    let shape = |a: f64, b: f64| {
        let (lo, hi) = (a.min(b), a.max(b));
        lo.powf(l) / hi - c * hi.powf(l - 1.0)
    };
    let num = shape(q * mp, (1.0 - q) * mm);
    let den = shape(mp, mm);
    Ok((q * (1.0 - q)).powf(0.5 * (1.0 - l)) * num / den)
}

/// Integrand weight of the spectral density viewed as a law on `[0, 1]`
/// with edge exponent `λα`.
struct SpectralLaw {
    lambda: f64,
    alpha: f64,
    // log of λ / (2 E V1^{1/λ} B(α, α))
    ln_const: f64,
}

impl SpectralLaw {
    fn new(lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) || is_zero(lambda) {
            return domain(format!("spectral density needs lambda in (0, 1], got {lambda}"));
        }
        let law = BetaAngle::new(alpha)?;
        let m = radial_moment(&law, &NormSpec::Linf, 1.0 / lambda)?;
        let ln_beta = 2.0 * ln_gamma(alpha) - ln_gamma(2.0 * alpha);
        Ok(Self {
            lambda,
            alpha,
            ln_const: lambda.ln() - std::f64::consts::LN_2 - m.ln() - ln_beta,
        })
    }
}

impl AngularLaw for SpectralLaw {
    fn edge_exponents(&self) -> (f64, f64) {
        let e = self.lambda * self.alpha;
        (e, e)
    }

    fn ln_density_core(&self, w: f64, wc: f64) -> f64 {
        let s = (self.lambda * w.ln()).exp() + (self.lambda * wc.ln()).exp();
        self.ln_const - 2.0 * self.alpha * s.ln() - w.max(wc).ln()
    }

    fn cdf(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        integrate_angle(self, |_, _| [1.0], 0.0, w.min(1.0), &[0.5], Tolerance::default())
            .map(|v| v[0])
            .unwrap_or(f64::NAN)
    }
}

/// Spectral density `h(w; λ, α)` of the limiting angular measure (L1
/// angle, standard Pareto margins) under the sup-norm model.
pub fn spectral_density(w: f64, lambda: f64, alpha: f64) -> Result<f64> {
    if !(w > 0.0 && w < 1.0) {
        return domain(format!("spectral density needs w in (0, 1), got {w}"));
    }
    Ok(SpectralLaw::new(lambda, alpha)?.density(w))
}

/// `[∫h, ∫w h]` over `(0, 1)`.
pub fn spectral_moments(lambda: f64, alpha: f64) -> Result<[f64; 2]> {
    let law = SpectralLaw::new(lambda, alpha)?;
    integrate_angle(&law, |w, _| [1.0, w], 0.0, 1.0, &[0.5], Tolerance::default())
}

/// Model `χ(u)` and `χ̄(u)` at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelChi {
    pub u: f64,
    pub chi: f64,
    pub chibar: f64,
    /// `u` lies above [`UNSTABLE_U`].
    pub unstable: bool,
}

pub fn model_chi(u: f64, copula: &Copula) -> Result<ModelChi> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("chi(u) needs u in (0, 1), got {u}"));
    }
    let joint = copula.joint_exceedance(u)?;
    let tail = 1.0 - u;
    Ok(ModelChi {
        u,
        chi: joint / tail,
        chibar: 2.0 * tail.ln() / joint.ln() - 1.0,
        unstable: u > UNSTABLE_U,
    })
}

/// `χ(u) = P(U1 > u | U2 > u)` under the model.
pub fn chi_u_model(u: f64, params: &ModelParams) -> Result<f64> {
    Ok(model_chi(u, &Copula::new(*params)?)?.chi)
}

/// `χ̄(u) = 2 log(1-u) / log P(U1 > u, U2 > u) - 1` under the model.
pub fn chibar_u_model(u: f64, params: &ModelParams) -> Result<f64> {
    Ok(model_chi(u, &Copula::new(*params)?)?.chibar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateStatus {
    Ok,
    /// No pair exceeds `u` in the conditioning coordinate (for `χ̂`) or
    /// jointly (for `χ̄̂`).
    Undefined,
}

/// Plug-in estimate with a normal-approximation confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub status: EstimateStatus,
}

impl Estimate {
    fn undefined() -> Self {
        Self { value: None, lower: None, upper: None, status: EstimateStatus::Undefined }
    }

    fn new(value: f64, half_width: f64, range: (f64, f64)) -> Self {
        Self {
            value: Some(value),
            lower: Some((value - half_width).max(range.0)),
            upper: Some((value + half_width).min(range.1)),
            status: EstimateStatus::Ok,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalChi {
    pub u: f64,
    pub n: usize,
    /// `#{u2 > u}`
    pub n_conditioning: usize,
    /// `#{u1 > u, u2 > u}`
    pub n_joint: usize,
    pub chi: Estimate,
    pub chibar: Estimate,
}

/// Empirical `χ̂(u) = #{u1 > u, u2 > u} / #{u2 > u}` and `χ̄̂(u)` from the
/// joint exceedance proportion, with 95% normal-approximation intervals.
pub fn chi_u_empirical(sample: &UniformSample, u: f64) -> Result<EmpiricalChi> {
    chi_u_empirical_at(sample, u, 0.95)
}

pub fn chi_u_empirical_at(sample: &UniformSample, u: f64, level: f64) -> Result<EmpiricalChi> {
    if sample.is_empty() {
        return domain("empirical chi needs a nonempty sample");
    }
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("chi(u) needs u in (0, 1), got {u}"));
    }
    if !(level > 0.0 && level < 1.0) {
        return domain(format!("confidence level must lie in (0, 1), got {level}"));
    }
    let z = norm_quantile(0.5 + 0.5 * level);
    let n = sample.len();
    let n_cond = sample.pairs().iter().filter(|p| p[1] > u).count();
    let n_joint = sample.pairs().iter().filter(|p| p[0] > u && p[1] > u).count();

    let chi = if n_cond == 0 {
        Estimate::undefined()
    } else {
        let c = n_joint as f64 / n_cond as f64;
        Estimate::new(c, z * (c * (1.0 - c) / n_cond as f64).sqrt(), (0.0, 1.0))
    };
    let chibar = if n_joint == 0 {
        Estimate::undefined()
    } else {
        let p = n_joint as f64 / n as f64;
        let lt = (1.0 - u).ln();
        let lp = p.ln();
        let value = 2.0 * lt / lp - 1.0;
        let se_p = (p * (1.0 - p) / n as f64).sqrt();
        let slope = (2.0 * lt / (p * lp * lp)).abs();
        Estimate::new(value, z * slope * se_p, (-1.0, 1.0))
    };
    Ok(EmpiricalChi { u, n, n_conditioning: n_cond, n_joint, chi, chibar })
}
