mod common;

use std::sync::OnceLock;

use common::*;
use evdep::model::*;
use evdep::simulate::sample_model;
use evdep::UniformSample;
use proptest::prelude::*;

fn params(lambda: f64, alpha: f64) -> ModelParams {
    ModelParams::new(lambda, alpha).unwrap()
}

// One shared 10^7-draw direct sample of (A, B) at λ = 0.5, α = 0.7.
fn direct_draws() -> &'static [[f64; 2]] {
    static CELL: OnceLock<Vec<[f64; 2]>> = OnceLock::new();
    CELL.get_or_init(|| draw_ab(0.5, 0.7, 10_000_000, 41))
}

fn model_sample() -> &'static UniformSample {
    static CELL: OnceLock<UniformSample> = OnceLock::new();
    CELL.get_or_init(|| sample_model(&params(0.5, 0.7), 10_000_000, 43).unwrap())
}

#[test]
fn gp_survivor_examples() {
    let unit = |shape| GPParams::new(1.0, shape).unwrap();
    assert_eq!(gp_survivor(0.0, &unit(0.3)).unwrap(), 1.0);
    assert_eq!(gp_survivor(0.0, &unit(-0.7)).unwrap(), 1.0);
    assert!((gp_survivor(2.0, &unit(0.0)).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
    assert_eq!(gp_survivor(3.0, &unit(-0.5)).unwrap(), 0.0);
    assert!(gp_survivor(-1.0, &unit(0.1)).is_err());
    assert!(GPParams::new(0.0, 0.1).is_err());
}

#[test]
fn angular_pair_examples() {
    let close = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15;
    assert!(close(angular_pair(0.5, &NormSpec::Linf).unwrap(), (1.0, 1.0)));
    assert!(close(angular_pair(0.3, &NormSpec::lp(1.0).unwrap()).unwrap(), (0.3, 0.7)));
    assert!(close(angular_pair(0.25, &NormSpec::Linf).unwrap(), (1.0 / 3.0, 1.0)));
}

proptest! {
    #[test]
    fn norm_axioms(x in 1e-3f64..10.0, y in 1e-3f64..10.0, c in 0.1f64..10.0, p in 1.0f64..12.0, v in 0.0f64..=1.0) {
        for norm in [NormSpec::Linf, NormSpec::lp(p).unwrap()] {
            let n = norm.norm(x, y);
            prop_assert!((n - norm.norm(y, x)).abs() <= 1e-14 * n);
            prop_assert!(n >= x.max(y) * (1.0 - 1e-15));
            prop_assert!((norm.norm(c * x, c * y) - c * n).abs() <= 1e-12 * c * n);
            let (v1, v2) = angular_pair(v, &norm).unwrap();
            prop_assert!(v1.max(v2) <= 1.0 + 1e-15);
            prop_assert!((norm.norm(v1, v2) - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn joint_density_symmetry_and_zero_limit() {
    let p = params(0.4, 0.8);
    let a = joint_density_ab(1.3, 0.4, &p).unwrap();
    let b = joint_density_ab(0.4, 1.3, &p).unwrap();
    assert!((a - b).abs() <= 1e-14 * a);

    // ‖(1,1)‖ = 1, (x+y)² = 4, (1+λ)^(-1/λ-1) → e^-1, f_V = 1
    let limit = (-1.0f64).exp() / 4.0;
    let at_zero = joint_density_ab(1.0, 1.0, &params(0.0, 1.0)).unwrap();
    let near_zero = joint_density_ab(1.0, 1.0, &params(1e-8, 1.0)).unwrap();
    assert!((at_zero - limit).abs() < 1e-14);
    assert!((near_zero - limit).abs() < 1e-7 * limit);
    assert!(joint_density_ab(0.0, 1.0, &p).is_err());
}

#[test]
fn joint_density_integrates_to_one() {
    // x = r w, y = r (1-w), dx dy = r dr dw; r = t/(1-t). By symmetry only
    // w < 1/2 is integrated, with w = s^4 / 2 to flatten the Beta edge.
    let p = params(0.5, 0.7);
    let t_nodes = unit_nodes(12, 8, 20);
    let s_nodes = unit_nodes(12, 8, 20);
    let mut total = 0.0;
    for &(s, ws) in &s_nodes {
        let w = 0.5 * s.powi(4);
        let dw = 2.0 * s.powi(3);
        if w <= 0.0 {
            continue;
        }
        for &(t, wt) in &t_nodes {
            if t >= 1.0 {
                continue;
            }
            let r = t / (1.0 - t);
            let dr = 1.0 / ((1.0 - t) * (1.0 - t));
            let f = joint_density_ab(r * w, r * (1.0 - w), &p).unwrap();
            total += ws * wt * f * r * dr * dw;
        }
    }
    let total = 2.0 * total;
    assert!((total - 1.0).abs() < 1e-4, "∫∫f = {total}");
}

#[test]
fn pseudo_survivor_examples() {
    for &(l, a) in &[(0.5, 0.7), (-0.5, 1.0), (0.0, 2.0)] {
        assert_eq!(pseudo_marginal_survivor(0.0, &params(l, a)).unwrap(), 1.0);
    }
    for &a in &[0.3, 1.0, 4.0] {
        let p = params(-0.5, a);
        assert_eq!(pseudo_marginal_survivor(2.0, &p).unwrap(), 0.0);
        assert_eq!(pseudo_marginal_survivor(2.5, &p).unwrap(), 0.0);
        assert!(pseudo_marginal_survivor(1.99, &p).unwrap() > 0.0);
    }
}

#[test]
fn pseudo_survivor_matches_direct_monte_carlo() {
    let draws = direct_draws();
    let hits = draws.iter().filter(|d| d[0] > 5.0).count();
    let (mc, se) = proportion(hits, draws.len());
    let exact = pseudo_marginal_survivor(5.0, &params(0.5, 0.7)).unwrap();
    assert!((mc - exact).abs() < 3.0 * se, "exact {exact}, MC {mc} ± {se}");
}

#[test]
fn pseudo_quantile_examples() {
    let p = params(0.5, 0.7);
    assert_eq!(pseudo_quantile(1.0, &p).unwrap(), 0.0);
    let x = pseudo_quantile(0.01, &p).unwrap();
    assert!((pseudo_marginal_survivor(x, &p).unwrap() - 0.01).abs() < 1e-10);
    assert!(pseudo_quantile(0.0, &p).is_err());
    assert!(pseudo_quantile(1.5, &p).is_err());
}

#[test]
fn pseudo_quantile_approaches_finite_endpoint() {
    // The gap to the endpoint shrinks like t^λ (up to a slowly varying factor)
    // along exceedance probabilities 1/t.
    let p = params(-0.5, 1.0);
    let q = pseudo_quantile(1e-6, &p).unwrap();
    assert!(q > 1.99 && q < 2.0, "{q}");
    let ts = log_space(1e4, 1e10, 13);
    let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let lg: Vec<f64> = ts.iter().map(|t| (2.0 - pseudo_quantile(1.0 / t, &p).unwrap()).ln()).collect();
    let (_, slope) = linear_fit(&lt, &lg);
    assert!((slope + 0.5).abs() < 0.02, "slope {slope}");
}

#[test]
fn quantile_roundtrip_on_log_grid() {
    for &(l, a) in &[(0.5, 0.7), (-0.5, 1.0), (0.0, 1.0), (0.9, 3.0), (-0.9, 0.4)] {
        let p = params(l, a);
        let m = PseudoMargin::new(p).unwrap();
        for q in log_space(1e-6, 1.0, 25) {
            let x = m.quantile(q).unwrap();
            let back = m.survivor(x).unwrap();
            assert!((back - q).abs() < 1e-9, "λ={l} α={a} p={q}: {back}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quantile_roundtrip_random_params(l in -0.95f64..1.0, a in 0.3f64..5.0, lp in -13.8f64..0.0) {
        let m = PseudoMargin::new(params(l, a)).unwrap();
        let q = lp.exp();
        let x = m.quantile(q).unwrap();
        prop_assert!((m.survivor(x).unwrap() - q).abs() < 1e-9);
    }

    #[test]
    fn survivor_decreasing(l in -0.95f64..1.0, a in 0.3f64..5.0, x in 0.01f64..1.9, dx in 0.001f64..0.1) {
        let m = PseudoMargin::new(params(l, a)).unwrap();
        // Strictly decreasing on the support, identically zero past a finite endpoint.
        if x < m.endpoint() {
            prop_assert!(m.survivor(x + dx).unwrap() < m.survivor(x).unwrap());
        } else {
            prop_assert!(m.survivor(x).unwrap() == 0.0 && m.survivor(x + dx).unwrap() == 0.0);
        }
    }
}

#[test]
fn joint_survivor_examples() {
    let p = params(0.5, 0.7);
    assert_eq!(joint_survivor(0.0, 0.0, &p).unwrap(), 1.0);
    for &x in &[0.3, 2.0, 40.0] {
        let j = joint_survivor(x, 0.0, &p).unwrap();
        let m = pseudo_marginal_survivor(x, &p).unwrap();
        assert!((j - m).abs() <= 1e-12 * m, "{j} vs {m}");
    }
    let draws = direct_draws();
    let hits = draws.iter().filter(|d| d[0] > 3.0 && d[1] > 3.0).count();
    let (mc, se) = proportion(hits, draws.len());
    let exact = joint_survivor(3.0, 3.0, &p).unwrap();
    assert!((mc - exact).abs() < 3.0 * se, "exact {exact}, MC {mc} ± {se}");
}

#[test]
fn joint_survivor_frechet_bounds_on_grid() {
    for &(l, a) in &[(0.5, 0.7), (-0.5, 1.0), (0.0, 2.0)] {
        let p = params(l, a);
        let m = PseudoMargin::new(p).unwrap();
        let xs = [0.05, 0.3, 0.8, 1.5, 1.95, 4.0, 20.0];
        for &x in &xs {
            for &y in &xs {
                let (sx, sy) = (m.survivor(x).unwrap(), m.survivor(y).unwrap());
                let j = joint_survivor(x, y, &p).unwrap();
                assert!(j >= (sx + sy - 1.0).max(0.0) - 1e-12, "λ={l} ({x},{y})");
                assert!(j <= sx.min(sy) + 1e-12, "λ={l} ({x},{y})");
            }
        }
    }
}

#[test]
fn copula_examples() {
    let p = params(0.5, 0.7);
    assert!((copula_cdf(0.37, 1.0, &p).unwrap() - 0.37).abs() < 1e-15);
    assert_eq!(copula_cdf(0.0, 0.9, &p).unwrap(), 0.0);

    let s = model_sample();
    let hits = s.pairs().iter().filter(|u| u[0] <= 0.95 && u[1] <= 0.95).count();
    let (mc, se) = proportion(hits, s.len());
    let exact = copula_cdf(0.95, 0.95, &p).unwrap();
    assert!((mc - exact).abs() < 3.0 * se, "exact {exact}, MC {mc} ± {se}");
}

#[test]
fn copula_density_symmetry_and_mixed_difference() {
    let p = params(0.5, 0.7);
    let a = copula_density(0.2, 0.8, &p).unwrap();
    let b = copula_density(0.8, 0.2, &p).unwrap();
    assert!((a - b).abs() < 1e-9 * a);

    let c = Copula::new(p).unwrap();
    let (u, v, h) = (0.9, 0.95, 2e-4);
    let fd = (c.cdf(u + h, v + h).unwrap() - c.cdf(u + h, v - h).unwrap() - c.cdf(u - h, v + h).unwrap()
        + c.cdf(u - h, v - h).unwrap())
        / (4.0 * h * h);
    let d = c.density(u, v).unwrap();
    assert!(((fd - d) / d).abs() < 1e-4, "{fd} vs {d}");
}

#[test]
fn copula_density_integrates_to_one() {
    let c = Copula::new(params(0.3, 1.0)).unwrap();
    let nodes = unit_nodes(10, 6, 12);
    let total: f64 = nodes
        .iter()
        .map(|&(u, wu)| nodes.iter().map(|&(v, wv)| wu * wv * c.density(u, v).unwrap()).sum::<f64>())
        .sum();
    assert!((total - 1.0).abs() < 1e-3, "∫∫c = {total}");
}

#[test]
fn copula_is_two_increasing() {
    for &(l, a) in &[(0.5, 0.7), (-0.5, 1.0)] {
        let c = Copula::new(params(l, a)).unwrap();
        let g: Vec<f64> = (0..=20).map(|i| 0.025 + 0.95 * i as f64 / 20.0).collect();
        let cdf: Vec<Vec<f64>> = g.iter().map(|&u| g.iter().map(|&v| c.cdf(u, v).unwrap()).collect()).collect();
        for i in 0..20 {
            for j in 0..20 {
                let vol = cdf[i + 1][j + 1] - cdf[i][j + 1] - cdf[i + 1][j] + cdf[i][j];
                assert!(vol >= -1e-8, "λ={l} cell ({i},{j}) volume {vol}");
            }
        }
    }
}

#[test]
fn lambda_continuity_through_zero() {
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let zero = params(0.0, 0.8);
    for &l in &[1e-6, -1e-6] {
        let p = params(l, 0.8);
        for &x in &[0.2, 1.0, 5.0] {
            let a = pseudo_marginal_survivor(x, &p).unwrap();
            let b = pseudo_marginal_survivor(x, &zero).unwrap();
            assert!(rel(a, b) < 1e-4, "survivor λ={l} x={x}");
            let a = joint_survivor(x, 0.7 * x, &p).unwrap();
            let b = joint_survivor(x, 0.7 * x, &zero).unwrap();
            assert!(rel(a, b) < 1e-4, "joint λ={l} x={x}");
        }
        let a = copula_density(0.9, 0.97, &p).unwrap();
        let b = copula_density(0.9, 0.97, &zero).unwrap();
        assert!(rel(a, b) < 1e-4, "copula density λ={l}");
    }
}

#[test]
fn sampler_matches_joint_survivor() {
    let p = params(0.5, 0.7);
    let m = PseudoMargin::new(p).unwrap();
    let s = &model_sample().pairs()[..1_000_000];
    for &(x, y) in &[(0.5, 0.5), (1.0, 3.0), (3.0, 3.0), (6.0, 2.0), (10.0, 10.0)] {
        let (ux, uy) = (1.0 - m.survivor(x).unwrap(), 1.0 - m.survivor(y).unwrap());
        let hits = s.iter().filter(|u| u[0] > ux && u[1] > uy).count();
        let (mc, se) = proportion(hits, s.len());
        let exact = joint_survivor(x, y, &p).unwrap();
        assert!((mc - exact).abs() < 3.0 * se.max(1e-7), "({x},{y}): exact {exact}, MC {mc} ± {se}");
    }
}
