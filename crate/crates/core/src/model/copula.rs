//! Copula of `(A, B)` and derived diagonal quantities.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::model::joint::{joint_survivor_with, ln_joint_density};
use crate::model::margin::PseudoMargin;
use crate::model::params::ModelParams;

/// Copula evaluator sharing one pseudo-margin across calls.
#[derive(Debug, Clone)]
pub struct Copula {
    margin: PseudoMargin,
}

fn check_unit(u: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&u) {
        return domain(format!("copula argument must lie in [0, 1], got {u}"));
    }
    Ok(())
}

impl Copula {
    pub fn new(params: ModelParams) -> Result<Self> {
        Ok(Self { margin: PseudoMargin::new(params)? })
    }

    pub fn from_margin(margin: PseudoMargin) -> Self {
        Self { margin }
    }

    pub fn margin(&self) -> &PseudoMargin {
        &self.margin
    }

    pub fn params(&self) -> &ModelParams {
        self.margin.params()
    }

    /// Pseudo-marginal quantile at probability `u`, i.e. exceedance `1 - u`.
    pub fn margin_quantile(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        if u == 1.0 {
            return Ok(self.margin.endpoint());
        }
        Ok(self.margin.solve(1.0 - u, None)?.x)
    }

    /// `C(u1, u2) = u1 + u2 - 1 + P(A > x, B > y)` at the matching quantiles.
    pub fn cdf(&self, u1: f64, u2: f64) -> Result<f64> {
        check_unit(u1)?;
        check_unit(u2)?;
        if u1 == 0.0 || u2 == 0.0 {
            return Ok(0.0);
        }
        if u1 == 1.0 {
            return Ok(u2);
        }
        if u2 == 1.0 {
            return Ok(u1);
        }
        let x = self.margin_quantile(u1)?;
        let y = self.margin_quantile(u2)?;
        let c = u1 + u2 - 1.0 + joint_survivor_with(&self.margin, x, y)?;
        Ok(c.clamp((u1 + u2 - 1.0).max(0.0), u1.min(u2)))
    }

    /// Copula density `f_AB(x, y) / {f_A(x) f_B(y)}` on the open square.
    pub fn density(&self, u1: f64, u2: f64) -> Result<f64> {
        Ok(self.ln_density(u1, u2)?.exp())
    }

    pub fn ln_density(&self, u1: f64, u2: f64) -> Result<f64> {
        if !(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0) {
            return domain(format!("copula density needs (u1, u2) in the open unit square, got ({u1}, {u2})"));
        }
        let a = self.margin.solve(1.0 - u1, None)?;
        let b = self.margin.solve(1.0 - u2, Some(a.x))?;
        Ok(ln_joint_density(&self.margin, a.x, b.x)? - a.density.ln() - b.density.ln())
    }

    /// Copula density on the grid `us × vs`, one row per `u`. Each
    /// coordinate's quantile is solved once rather than once per cell.
    pub fn density_grid(&self, us: &[f64], vs: &[f64]) -> Result<Vec<Vec<f64>>> {
        for &u in us.iter().chain(vs) {
            if !(u > 0.0 && u < 1.0) {
                return domain(format!("copula density needs coordinates in (0, 1), got {u}"));
            }
        }
        let exceed = |g: &[f64]| g.iter().map(|u| 1.0 - u).collect::<Vec<_>>();
        let a = self.margin.solve_many(&exceed(us))?;
        let b = self.margin.solve_many(&exceed(vs))?;
        a.par_iter()
            .map(|pa| {
                b.iter()
                    .map(|pb| Ok((ln_joint_density(&self.margin, pa.x, pb.x)? - pa.density.ln() - pb.density.ln()).exp()))
                    .collect()
            })
            .collect()
    }

    /// `P(U1 > u, U2 > u)`, evaluated as a joint survivor so that no
    /// cancellation occurs near `u = 1`.
    pub fn joint_exceedance(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        if u == 0.0 {
            return Ok(1.0);
        }
        if u == 1.0 {
            return Ok(0.0);
        }
        let q = self.margin_quantile(u)?;
        joint_survivor_with(&self.margin, q, q)
    }
}

pub fn copula_cdf(u1: f64, u2: f64, params: &ModelParams) -> Result<f64> {
    Copula::new(*params)?.cdf(u1, u2)
}

pub fn copula_density(u1: f64, u2: f64, params: &ModelParams) -> Result<f64> {
    Copula::new(*params)?.density(u1, u2)
}
