//! Negative log-likelihood on a parameter grid.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::inference::likelihood::censored_loglik;
use crate::model::norm::NormSpec;
use crate::model::params::ModelParams;
use crate::sample::UniformSample;

/// `out[i][j] = -loglik(λ_i, α_j)`. Cells where the likelihood is not
/// finite hold `+inf`.
pub fn loglik_surface(
    sample: &UniformSample,
    censor_u: f64,
    norm: NormSpec,
    lambdas: &[f64],
    alphas: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if lambdas.is_empty() || alphas.is_empty() {
        return domain("likelihood surface needs nonempty grids");
    }
    let cells: Vec<(usize, usize)> = (0..lambdas.len()).flat_map(|i| (0..alphas.len()).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let p = ModelParams::with_norm(lambdas[i], alphas[j], norm)?;
            Ok(-censored_loglik(&p, sample, censor_u)?.value)
        })
        .collect::<Result<_>>()?;
    Ok(values.chunks(alphas.len()).map(|r| r.to_vec()).collect())
}
