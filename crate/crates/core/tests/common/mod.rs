//! Oracles shared by the integration tests. Everything here is written
//! independently of the library's own quadrature and samplers.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Distribution};

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Panels of `[0, 1]` refined geometrically towards both ends.
pub fn graded_panels(levels: usize, interior: usize) -> Vec<(f64, f64)> {
    let mut edges = vec![0.0];
    for k in (1..=levels).rev() {
        edges.push(0.5 * 0.25f64.powi(k as i32));
    }
    for i in 0..=interior {
        edges.push(0.125 + 0.75 * i as f64 / interior as f64);
    }
    for k in 1..=levels {
        edges.push(1.0 - 0.5 * 0.25f64.powi(k as i32));
    }
    edges.push(1.0);
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Quadrature nodes `(x, weight)` over `[0, 1]` on graded panels.
pub fn unit_nodes(levels: usize, interior: usize, order: usize) -> Vec<(f64, f64)> {
    let gl = gauss_legendre(order);
    let mut out = Vec::new();
    for (a, b) in graded_panels(levels, interior) {
        let h = 0.5 * (b - a);
        for &(x, w) in &gl {
            out.push((a + h * (x + 1.0), h * w));
        }
    }
    out
}

/// Direct draws of `(A, B) = S (V, 1-V) / max(V, 1-V)`, built from the
/// GP inverse survivor and a Beta variate.
pub fn draw_ab(lambda: f64, alpha: f64, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let beta = Beta::new(alpha, alpha).unwrap();
    (0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>();
            let s = if lambda == 0.0 { -u.ln() } else { (u.powf(-lambda) - 1.0) / lambda };
            let v: f64 = beta.sample(&mut rng);
            let m = v.max(1.0 - v);
            [s * v / m, s * (1.0 - v) / m]
        })
        .collect()
}

/// Proportion with its binomial standard error.
pub fn proportion(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Least-squares `(intercept, slope)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One-sample Kolmogorov–Smirnov distance to the uniform law.
pub fn ks_uniform(mut x: Vec<f64>) -> f64 {
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).max((i + 1) as f64 / n - v))
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS distance.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
