//! Transforms, censored likelihood, fitting and derived estimates.

pub mod diagnostic;
pub mod fit;
pub mod likelihood;
pub mod profile;
pub mod rect;
pub mod surface;
pub mod transform;

pub use diagnostic::{sv_diagnostic, SvDiagnostic, SvStatus};
pub use fit::{fit, fit_data, FitConfig, FitResult, TransformKind};
pub use likelihood::{censored_loglik, censored_loglik_grad, LogLik, NonFinite};
pub use profile::{profile_ci, profile_nll, BoundStatus, Param, ProfileBound, ProfileInterval};
pub use rect::{rect_prob, rect_prob_inclusion_exclusion, rect_prob_with, RectProb, RectRegion};
pub use surface::loglik_surface;
pub use transform::{rank_transform, semiparametric_transform, MarginTransform, SemiparametricResult};
