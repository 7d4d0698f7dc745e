//! Seeded samplers on the copula scale.
//!
//! Every sampler draws from a ChaCha20 stream selected by `(seed, stream)`,
//! so replicates generated in parallel do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::angular::{AngularLaw, BetaAngle};
use crate::model::gp::Radial;
use crate::model::margin::PseudoMargin;
use crate::model::params::ModelParams;
use crate::numerics::stats::{ks_critical, ks_statistic, norm_cdf};
use crate::sample::{Provenance, UniformSample};

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on the open interval `(0, 1)`.
fn open_unit(rng: &mut ChaCha20Rng) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            return r;
        }
    }
}

// Largest double below one; values are clamped into the open square so
// that far-tail draws which round to 0 or 1 stay valid.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

fn open_square(u: f64) -> f64 {
    u.clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

fn finish(pairs: Vec<[f64; 2]>) -> Result<UniformSample> {
    UniformSample::new(pairs, Provenance::Simulated)
}

/// Dependence families used as simulation truths, plus the model itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Structure {
    NewModel { lambda: f64, alpha: f64 },
    /// Symmetric logistic extreme-value copula; `dep = 1` is independence.
    Logistic { dep: f64 },
    /// Reflection of the logistic copula through `(1/2, 1/2)`.
    InvertedLogistic { dep: f64 },
    GaussianCopula { rho: f64 },
}

impl Structure {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Structure::NewModel { lambda, alpha } => ModelParams::new(lambda, alpha).map(|_| ()),
            Structure::Logistic { dep } | Structure::InvertedLogistic { dep } => check_dep(dep),
            Structure::GaussianCopula { rho } => check_rho(rho),
        }
    }

    /// Draw `n` pairs from stream `stream` of `seed`.
    pub fn sample(&self, n: usize, seed: u64, stream: u64) -> Result<UniformSample> {
        match *self {
            Structure::NewModel { lambda, alpha } => {
                sample_model_stream(&PseudoMargin::with_cache(ModelParams::new(lambda, alpha)?)?, n, seed, stream)
            }
            Structure::Logistic { dep } => logistic_stream(dep, n, seed, stream, false),
            Structure::InvertedLogistic { dep } => logistic_stream(dep, n, seed, stream, true),
            Structure::GaussianCopula { rho } => gaussian_stream(rho, n, seed, stream),
        }
    }

    /// Short label such as `logistic(dep=0.8)`.
    pub fn label(&self) -> String {
        match *self {
            Structure::NewModel { lambda, alpha } => format!("new-model(lambda={lambda},alpha={alpha})"),
            Structure::Logistic { dep } => format!("logistic(dep={dep})"),
            Structure::InvertedLogistic { dep } => format!("inverted-logistic(dep={dep})"),
            Structure::GaussianCopula { rho } => format!("gaussian(rho={rho})"),
        }
    }
}

fn check_dep(dep: f64) -> Result<()> {
    if !(dep > 0.0 && dep <= 1.0) {
        return domain(format!("logistic dependence must lie in (0, 1], got {dep}"));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > -1.0 && rho < 1.0) {
        return domain(format!("correlation must lie in (-1, 1), got {rho}"));
    }
    Ok(())
}

/// `n` pairs from the model copula: `S ~ GP(1, λ)` and `V ~ Beta(α, α)`
/// independent, `(A, B) = S (V, 1-V) / ‖(V, 1-V)‖`, then each coordinate
/// pushed through the pseudo-marginal CDF.
pub fn sample_model(params: &ModelParams, n: usize, seed: u64) -> Result<UniformSample> {
    sample_model_stream(&PseudoMargin::with_cache(*params)?, n, seed, 0)
}

pub fn sample_model_stream(margin: &PseudoMargin, n: usize, seed: u64, stream: u64) -> Result<UniformSample> {
    let params = *margin.params();
    let radial = Radial::new(params.lambda);
    let gamma = Gamma::new(params.alpha, 1.0).map_err(|e| crate::Error::Domain(e.to_string()))?;
    let mut rng = stream_rng(seed, stream);
    // V = X / (X + Y) with independent Gamma(α) draws keeps both V and 1-V
    // accurate near the edges.
    let ab: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            let s = radial.quantile_from_survivor(open_unit(&mut rng));
            let (x, y): (f64, f64) = (gamma.sample(&mut rng), gamma.sample(&mut rng));
            let sum = x + y;
            let (v, w) = if sum > 0.0 { (x / sum, y / sum) } else { (0.5, 0.5) };
            let m = params.norm.norm(v, w);
            [s * v / m, s * w / m]
        })
        .collect();
    let pairs: Vec<[f64; 2]> = ab
        .par_iter()
        .map(|p| Ok([open_square(margin.cdf_fast(p[0])?), open_square(margin.cdf_fast(p[1])?)]))
        .collect::<Result<_>>()?;
    finish(pairs)
}

/// Positive stable variable with Laplace transform `exp(-s^a)`, `0 < a < 1`
/// (Kanter's representation).
fn positive_stable(a: f64, rng: &mut ChaCha20Rng) -> f64 {
    let theta = std::f64::consts::PI * open_unit(rng);
    let e: f64 = Exp1.sample(rng);
    let left = (a * theta).sin() / theta.sin().powf(1.0 / a);
    let right = (((1.0 - a) * theta).sin() / e).powf((1.0 - a) / a);
    left * right
}

/// `n` pairs from the symmetric logistic extreme-value copula
/// `C(u, v) = exp(-{(-log u)^{1/dep} + (-log v)^{1/dep}}^{dep})`,
/// drawn exactly as `U_i = exp(-(E_i / W)^dep)` with `W` positive stable.
pub fn sample_logistic(dep: f64, n: usize, seed: u64) -> Result<UniformSample> {
    logistic_stream(dep, n, seed, 0, false)
}

/// The logistic sample reflected: `(1 - U1, 1 - U2)`.
pub fn sample_inverted_logistic(dep: f64, n: usize, seed: u64) -> Result<UniformSample> {
    logistic_stream(dep, n, seed, 0, true)
}

fn logistic_stream(dep: f64, n: usize, seed: u64, stream: u64, inverted: bool) -> Result<UniformSample> {
    check_dep(dep)?;
    let mut rng = stream_rng(seed, stream);
    let pairs = (0..n)
        .map(|_| {
            let w = if dep < 1.0 { positive_stable(dep, &mut rng) } else { 1.0 };
            let mut out = [0.0; 2];
            for o in out.iter_mut() {
                let e: f64 = Exp1.sample(&mut rng);
                let t = (e / w).powf(dep);
                // exp(-t) and its complement, each without cancellation.
                *o = open_square(if inverted { -(-t).exp_m1() } else { (-t).exp() });
            }
            out
        })
        .collect();
    finish(pairs)
}

/// `n` pairs from the Gaussian copula with correlation `rho`.
pub fn sample_gaussian_copula(rho: f64, n: usize, seed: u64) -> Result<UniformSample> {
    gaussian_stream(rho, n, seed, 0)
}

fn gaussian_stream(rho: f64, n: usize, seed: u64, stream: u64) -> Result<UniformSample> {
    check_rho(rho)?;
    let s = (1.0 - rho * rho).sqrt();
    let mut rng = stream_rng(seed, stream);
    let phi = |z: f64| open_square(norm_cdf(z));
    let pairs = (0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z3: f64 = StandardNormal.sample(&mut rng);
            [phi(z1), phi(rho * z1 + s * z3)]
        })
        .collect();
    finish(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularCheck {
    pub ks: f64,
    /// Kolmogorov–Smirnov critical value at 1% for `n_retained`.
    pub critical_1pct: f64,
    pub n_retained: usize,
}

impl AngularCheck {
    pub fn passes(&self) -> bool {
        self.ks < self.critical_1pct
    }
}

/// Angles `W = X / (X + Y)` of independent `Gamma(α)` pairs whose radius
/// `R = X + Y` is in the top 1%, compared with `Beta(α, α)`.
pub fn angular_limit_check(alpha: f64, n: usize, seed: u64) -> Result<AngularCheck> {
    let law = BetaAngle::new(alpha)?;
    if n < 100 {
        return domain(format!("angular check needs at least 100 draws, got {n}"));
    }
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| crate::Error::Domain(e.to_string()))?;
    let mut rng = stream_rng(seed, 0);
    let mut draws: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let (x, y): (f64, f64) = (gamma.sample(&mut rng), gamma.sample(&mut rng));
            (x + y, x / (x + y))
        })
        .collect();
    let keep = n / 100;
    draws.select_nth_unstable_by(n - keep, |a, b| a.0.total_cmp(&b.0));
    let w: Vec<f64> = draws[n - keep..].iter().map(|d| d.1).collect();
    Ok(AngularCheck {
        ks: ks_statistic(&w, |v| law.cdf(v)),
        critical_1pct: ks_critical(keep, 0.01),
        n_retained: keep,
    })
}
