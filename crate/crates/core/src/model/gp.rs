//! Generalized Pareto radial law.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Shapes closer to zero than this use the exponential limit forms.
pub const LAMBDA_ZERO: f64 = 1e-8;

/// GP(σ, λ) parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPParams {
    pub sigma: f64,
    pub shape: f64,
}

impl GPParams {
    pub fn new(sigma: f64, shape: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return domain(format!("GP scale must be positive, got {sigma}"));
        }
        if !shape.is_finite() {
            return domain("GP shape must be finite");
        }
        Ok(Self { sigma, shape })
    }

    /// Upper end of the support: `+inf` for `shape >= 0`, `-sigma/shape` otherwise.
    pub fn upper_endpoint(&self) -> f64 {
        if self.shape >= 0.0 {
            f64::INFINITY
        } else {
            -self.sigma / self.shape
        }
    }
}

/// `(1 + shape*r/sigma)_+^{-1/shape}`, with `exp(-r/sigma)` near zero shape.
pub fn gp_survivor(r: f64, gp: &GPParams) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("GP survivor needs r >= 0, got {r}"));
    }
    if !(gp.sigma > 0.0) {
        return domain(format!("GP scale must be positive, got {}", gp.sigma));
    }
    Ok(Radial::new(gp.shape).survivor(r / gp.sigma))
}

/// Unit-scale GP(1, λ) evaluated in the stable forms the model integrands
/// need: log survivor, density and the shape derivative of the log survivor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Radial {
    pub lambda: f64,
}

impl Radial {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.lambda.abs() < LAMBDA_ZERO
    }

    /// `1 + λ s`, or `None` when `s` is at or beyond the support end.
    #[inline]
    pub fn base(&self, s: f64) -> Option<f64> {
        if self.is_zero() {
            return Some(1.0);
        }
        let b = 1.0 + self.lambda * s;
        if b > 0.0 && s.is_finite() {
            Some(b)
        } else if s.is_infinite() && self.lambda > 0.0 {
            Some(f64::INFINITY)
        } else {
            None
        }
    }

    /// `log K(s)`; `-inf` outside the support.
    #[inline]
    pub fn log_survivor(&self, s: f64) -> f64 {
        if s.is_infinite() {
            return f64::NEG_INFINITY;
        }
        if self.is_zero() {
            return -s;
        }
        let z = self.lambda * s;
        if z <= -1.0 {
            f64::NEG_INFINITY
        } else {
            -z.ln_1p() / self.lambda
        }
    }

    #[inline]
    pub fn survivor(&self, s: f64) -> f64 {
        self.log_survivor(s).exp()
    }

    /// `∂/∂λ log K(s) = {log(1+λs) - λs/(1+λs)} / λ²`, continuous through λ = 0.
    #[inline]
    pub fn dlog_survivor_dlambda(&self, s: f64) -> f64 {
        let z = self.lambda * s;
        if z.abs() < 1e-2 {
            // series in z of {log1p(z) - z/(1+z)}/z²
            let series = 0.5 - z * (2.0 / 3.0 - z * (0.75 - z * (0.8 - z * (5.0 / 6.0 - z * (6.0 / 7.0)))));
            s * s * series
        } else {
            (z.ln_1p() - z / (1.0 + z)) / (self.lambda * self.lambda)
        }
    }

    /// Draw from GP(1, λ) by inversion of a uniform on (0, 1].
    #[inline]
    pub fn quantile_from_survivor(&self, p: f64) -> f64 {
        if self.is_zero() {
            -p.ln()
        } else {
            // (p^{-λ} - 1)/λ
            (-self.lambda * p.ln()).exp_m1() / self.lambda
        }
    }
}
