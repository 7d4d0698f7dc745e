//! Model parameter vector.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::angular::BetaAngle;
use crate::model::norm::NormSpec;

/// Largest admissible radial shape. Heavier radial tails make the
/// pseudo-margins numerically fragile.
pub const LAMBDA_MAX: f64 = 1.0;

/// `(λ, α, norm)`: GP(1, λ) radius, Beta(α, α) angle, angular norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub alpha: f64,
    #[serde(default)]
    pub norm: NormSpec,
}

impl ModelParams {
    /// Parameters with the default sup norm.
    pub fn new(lambda: f64, alpha: f64) -> Result<Self> {
        Self::with_norm(lambda, alpha, NormSpec::Linf)
    }

    pub fn with_norm(lambda: f64, alpha: f64, norm: NormSpec) -> Result<Self> {
        let p = Self { lambda, alpha, norm };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda <= LAMBDA_MAX) {
            return domain(format!("lambda must be finite and at most {LAMBDA_MAX}, got {}", self.lambda));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return domain(format!("alpha must be positive, got {}", self.alpha));
        }
        self.norm.validate()
    }

    pub fn angle(&self) -> Result<BetaAngle> {
        BetaAngle::new(self.alpha)
    }

    /// Upper end `Λ` of the pseudo-marginal support.
    pub fn endpoint(&self) -> f64 {
        if self.lambda >= 0.0 {
            f64::INFINITY
        } else {
            -1.0 / self.lambda
        }
    }
}
