//! The copula model: radial and angular laws, pseudo-margins, joint law
//! and the induced copula.

pub mod angular;
mod cache;
pub mod copula;
pub mod gp;
pub mod joint;
pub mod margin;
pub mod norm;
pub mod params;

pub use angular::{AngularLaw, BetaAngle};
pub use copula::{copula_cdf, copula_density, Copula};
pub use gp::{gp_survivor, GPParams};
pub use joint::{joint_density_ab, joint_survivor};
pub use margin::{MarginPoint, PseudoMargin};
pub use norm::{angular_pair, NormSpec};
pub use params::ModelParams;

/// `P(A > x)` for the pseudo-margin of `params`.
pub fn pseudo_marginal_survivor(x: f64, params: &ModelParams) -> crate::Result<f64> {
    PseudoMargin::new(*params)?.survivor(x)
}

/// Pseudo-marginal quantile at exceedance probability `p`.
pub fn pseudo_quantile(p: f64, params: &ModelParams) -> crate::Result<f64> {
    PseudoMargin::new(*params)?.quantile(p)
}
