//! Samplers, reference probabilities and the replicate experiment.

pub mod experiment;
pub mod samplers;
pub mod truth;

pub use experiment::{run_experiment, table1_mini, ExperimentReport, Family, ScenarioConfig};
pub use samplers::{
    angular_limit_check, sample_gaussian_copula, sample_inverted_logistic, sample_logistic, sample_model, AngularCheck,
    Structure,
};
pub use truth::{bivariate_normal_cdf, monte_carlo_rects, truth_rect, McEstimate};
