//! Small statistical utilities shared by diagnostics and tests.

use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`, accurate for large `x`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn norm_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `Φ(b) - Φ(a)` for `a <= b`, computed on whichever tail avoids cancellation.
pub fn norm_interval(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        norm_sf(a) - norm_sf(b)
    } else if b <= 0.0 {
        norm_cdf(b) - norm_cdf(a)
    } else {
        1.0 - norm_cdf(a) - norm_sf(b)
    }
}

/// Upper quantile of the chi-square distribution with one degree of freedom.
pub fn chisq1_quantile(level: f64) -> f64 {
    let z = norm_quantile(0.5 + 0.5 * level);
    z * z
}

/// Two-sided Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value for sample size `n`.
///
/// Uses the limiting Kolmogorov quantiles (1.224, 1.358, 1.628 at the 10%,
/// 5%, 1% levels) with the small-sample correction `sqrt(n) + 0.12 + 0.11/sqrt(n)`.
pub fn ks_critical(n: usize, significance: f64) -> f64 {
    let k = if significance <= 0.01 {
        1.628
    } else if significance <= 0.05 {
        1.358
    } else {
        1.224
    };
    let s = (n as f64).sqrt();
    k / (s + 0.12 + 0.11 / s)
}

/// Kendall's tau-b between paired samples.
///
/// Returns `None` when either margin is constant.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                ties_x += 1;
                ties_y += 1;
            } else if dx == 0.0 {
                ties_x += 1;
            } else if dy == 0.0 {
                ties_y += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n as i64) * (n as i64 - 1) / 2;
    let denom = (((pairs - ties_x) as f64) * ((pairs - ties_y) as f64)).sqrt();
    if denom == 0.0 {
        None
    } else {
        Some((concordant - discordant) as f64 / denom)
    }
}

/// Linear least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
