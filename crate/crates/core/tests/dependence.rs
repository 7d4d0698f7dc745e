mod common;

use common::*;
use evdep::dependence::*;
use evdep::model::*;
use evdep::simulate::sample_model;
use evdep::{Provenance, UniformSample};
use proptest::prelude::*;

fn params(lambda: f64, alpha: f64) -> ModelParams {
    ModelParams::new(lambda, alpha).unwrap()
}

fn l1(lambda: f64, alpha: f64) -> ModelParams {
    ModelParams::with_norm(lambda, alpha, NormSpec::lp(1.0).unwrap()).unwrap()
}

fn sample(pairs: Vec<[f64; 2]>) -> UniformSample {
    UniformSample::new(pairs, Provenance::Simulated).unwrap()
}

#[test]
fn chi_lambda_examples() {
    assert!(chi_lambda(&params(0.001, 1.0)).unwrap() < 0.05);
    assert!(chi_lambda(&params(0.5, 500.0)).unwrap() > 0.95);
    assert!(chi_lambda(&params(0.0, 1.0)).is_err());
    assert!(chi_lambda(&params(-0.3, 1.0)).is_err());
}

#[test]
fn chi_lambda_matches_empirical_tail() {
    // χ̂ from about 1000 conditioning exceedances has standard error near
    // 0.015, and χ(u) is still above its limit at u = 0.9999. The sampler is
    // therefore compared with the exact finite-level χ(u), and that exact
    // path with the limit χ_λ.
    let p = params(0.5, 0.7);
    let chi = chi_lambda(&p).unwrap();
    let s = sample_model(&p, 10_000_000, 2718).unwrap();
    let e = chi_u_empirical(&s, 0.9999).unwrap();
    let emp = e.chi.value.unwrap();
    let exact = chi_u_model(0.9999, &p).unwrap();
    let se = (exact * (1.0 - exact) / e.n_conditioning as f64).sqrt();
    assert!((emp - exact).abs() <= 3.0 * se, "exact χ(0.9999) = {exact}, χ̂ = {emp} ± {se}");

    let path: Vec<f64> = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7].iter().map(|&q| chi_u_model(1.0 - q, &p).unwrap()).collect();
    assert!(path.windows(2).all(|w| w[1] < w[0] && w[1] > chi), "{path:?} vs χ_λ = {chi}");
    assert!(path[4] - chi < 0.01, "{path:?} vs χ_λ = {chi}");
}

#[test]
fn chi_lambda_vanishes_towards_zero() {
    let seq: Vec<f64> = [0.2, 0.1, 0.05, 0.01].iter().map(|&l| chi_lambda(&params(l, 1.0)).unwrap()).collect();
    assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    assert!(seq[3] < 0.05);
}

#[test]
fn dependence_class_and_summary() {
    let ad = summary(&params(0.4, 1.0)).unwrap();
    assert_eq!(ad.dep_class, DepClass::AsymptoticDependence);
    assert!(ad.chi > 0.0);
    assert_eq!(ad.eta, Coefficient::Value(1.0));
    for l in [0.0, -0.4] {
        let ai = summary(&params(l, 1.0)).unwrap();
        assert_eq!(ai.dep_class, DepClass::AsymptoticIndependence);
        assert_eq!(ai.chi, 0.0);
    }
}

#[test]
fn eta_examples() {
    assert_eq!(eta(&params(0.3, 0.4)), Coefficient::Value(1.0));
    assert_eq!(eta(&params(0.3, 7.0)), Coefficient::Value(1.0));
    let e = eta(&params(-0.43, 1.0)).value().unwrap();
    assert!((e - 0.6993).abs() < 1e-4);
    assert_eq!(eta(&l1(-0.2, 1.0)), Coefficient::IllDefined);
    assert_eq!(eta(&l1(0.0, 1.0)), Coefficient::Value(0.5));
}

#[test]
fn kappa_examples() {
    let k = |b, g, p: &ModelParams| kappa(&KappaQuery::new(b, g).unwrap(), p);
    assert_eq!(k(2.0, 3.0, &params(0.7, 1.0)), Coefficient::Value(3.0));
    assert_eq!(k(1.0, 1.0, &params(-0.5, 1.0)), Coefficient::Value(1.5));
    assert_eq!(k(2.0, 1.0, &params(0.0, 1.0)), Coefficient::Value(2.0));
    assert_eq!(k(1.0, 1.0, &l1(-0.5, 1.0)), Coefficient::IllDefined);
    assert!(KappaQuery::new(0.0, 1.0).is_err());
}

proptest! {
    #[test]
    fn kappa_homogeneous_and_consistent_with_eta(
        b in 0.05f64..5.0,
        g in 0.05f64..5.0,
        l in prop::sample::select(vec![0.6, 0.0, -0.3, -0.9]),
        use_l1 in any::<bool>(),
    ) {
        let p = if use_l1 { l1(l, 1.0) } else { params(l, 1.0) };
        let q = KappaQuery::new(b, g).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled = KappaQuery::new(c * b, c * g).unwrap();
            match (kappa(&q, &p), kappa(&scaled, &p)) {
                (Coefficient::Value(a), Coefficient::Value(s)) => prop_assert!((s - c * a).abs() < 1e-12 * s),
                (Coefficient::IllDefined, Coefficient::IllDefined) => {}
                other => prop_assert!(false, "{other:?}"),
            }
        }
        let diag = kappa(&KappaQuery::new(1.0, 1.0).unwrap(), &p);
        if let (Some(e), Some(k)) = (eta(&p).value(), diag.value()) {
            prop_assert!((e - 1.0 / k).abs() < 1e-14);
        }
    }
}

#[test]
fn ray_dependence_ad_examples() {
    let p = params(0.5, 0.7);
    assert!((ray_dependence_ad(0.5, &p).unwrap() - 1.0).abs() < 1e-10);
    let a = ray_dependence_ad(0.3, &p).unwrap();
    let b = ray_dependence_ad(0.7, &p).unwrap();
    assert!((a - b).abs() < 1e-10 * a);
    assert!(ray_dependence_ad(0.3, &params(-0.1, 1.0)).is_err());
}

// P{A > q_A(tq), B > q_B(t(1-q))} / P{A > q_A(t), B > q_B(t)} at large t,
// which tends to d(q) / (q(1-q))^e.
fn ray_ratio(p: &ModelParams, q: f64, t: f64, e: f64) -> f64 {
    let m = PseudoMargin::new(*p).unwrap();
    let quant = |tt: f64| m.quantile(1.0 / tt).unwrap();
    let num = joint_survivor(quant(t * q), quant(t * (1.0 - q)), p).unwrap();
    let den = joint_survivor(quant(t), quant(t), p).unwrap();
    (q * (1.0 - q)).powf(e) * num / den
}

#[test]
fn ray_dependence_ad_matches_tail_ratio() {
    let p = params(0.5, 1.0);
    let d = ray_dependence_ad(0.25, &p).unwrap();
    let quad = ray_ratio(&p, 0.25, 1e6, 0.5);
    assert!(((quad - d) / d).abs() < 0.02, "d = {d}, ratio {quad}");

    // Monte Carlo version of the same ratio at a moderate level.
    let m = PseudoMargin::new(p).unwrap();
    let draws = draw_ab(0.5, 1.0, 4_000_000, 99);
    let t = 400.0;
    let quant = |tt: f64| m.quantile(1.0 / tt).unwrap();
    let (x1, y1, x0) = (quant(0.25 * t), quant(0.75 * t), quant(t));
    let num = draws.iter().filter(|a| a[0] > x1 && a[1] > y1).count() as f64;
    let den = draws.iter().filter(|a| a[0] > x0 && a[1] > x0).count() as f64;
    let mc = (0.25f64 * 0.75).sqrt() * num / den;
    assert!(((mc - d) / d).abs() < 0.05, "d = {d}, MC ratio {mc}");
}

#[test]
fn ray_dependence_ai_examples() {
    let p = params(-0.5, 1.0);
    assert!((ray_dependence_ai(0.5, &p).unwrap() - 1.0).abs() < 1e-12);
    let a = ray_dependence_ai(0.2, &p).unwrap();
    let b = ray_dependence_ai(0.8, &p).unwrap();
    assert!((a - b).abs() < 1e-12 * a);
    assert!(ray_dependence_ai(0.3, &params(0.5, 1.0)).is_err());
    assert!(ray_dependence_ai(0.3, &l1(-0.5, 1.0)).is_err());

    let d = ray_dependence_ai(0.3, &p).unwrap();
    let ratio = ray_ratio(&p, 0.3, 1e6, 0.75);
    assert!(((ratio - d) / d).abs() < 0.05, "d = {d}, ratio {ratio}");
}

// ∫ g(w) h(w) dw on (0, 1), folded onto (0, 1/2) by the symmetry
// h(w) = h(1-w), with w = s^k / 2 and k = 1/(λα) so that the edge
// singularity w^{λα-1} becomes bounded. Folding keeps w representable
// near the edge, where 1 - w would round to 1.
fn spectral_integral(lambda: f64, alpha: f64, g: impl Fn(f64) -> f64) -> f64 {
    let k = 1.0 / (lambda * alpha);
    let nodes = unit_nodes(8, 6, 20);
    let mut total = 0.0;
    for &(s, ws) in &nodes {
        let d = 0.5 * s.powf(k);
        if d <= 0.0 {
            continue;
        }
        let jac = 0.5 * k * s.powf(k - 1.0);
        let h = spectral_density(d, lambda, alpha).unwrap();
        total += ws * jac * h * (g(d) + g(1.0 - d));
    }
    total
}

#[test]
fn spectral_density_examples() {
    let a = spectral_density(0.15, 0.5, 0.7).unwrap();
    let b = spectral_density(0.85, 0.5, 0.7).unwrap();
    assert!((a - b).abs() < 1e-12 * a);
    assert!(spectral_density(0.3, -0.2, 1.0).is_err());
    assert!(spectral_density(0.0, 0.5, 1.0).is_err());
    let mean = spectral_integral(0.5, 1.0, |w| w);
    assert!((mean - 0.5).abs() < 1e-6, "{mean}");
    let mass = spectral_integral(0.8, 0.5, |_| 1.0);
    assert!((mass - 1.0).abs() < 1e-6, "{mass}");
}

#[test]
fn spectral_constraints_on_grid() {
    for l in [0.2, 0.5, 0.8] {
        for a in [0.5, 1.0, 2.0] {
            let mass = spectral_integral(l, a, |_| 1.0);
            let mean = spectral_integral(l, a, |w| w);
            assert!((mass - 1.0).abs() < 1e-6, "λ={l} α={a} mass {mass}");
            assert!((mean - 0.5).abs() < 1e-6, "λ={l} α={a} mean {mean}");
            let [m0, m1] = spectral_moments(l, a).unwrap();
            assert!((m0 - mass).abs() < 1e-7 && (m1 - mean).abs() < 1e-7);
        }
    }
}

#[test]
fn chi_u_definitions_on_reference_samples() {
    // Midpoint grid: exactly 5% of each margin above 0.95, independently.
    let m = 100;
    let g: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    let indep = sample(g.iter().flat_map(|&a| g.iter().map(move |&b| [a, b])).collect());
    let e = chi_u_empirical(&indep, 0.95).unwrap();
    assert!((e.chi.value.unwrap() - 0.05).abs() < 1e-12);
    assert!(e.chibar.value.unwrap().abs() < 1e-12);

    let g: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
    let comono = sample(g.iter().map(|&a| [a, a]).collect());
    let e = chi_u_empirical(&comono, 0.99).unwrap();
    assert!((e.chi.value.unwrap() - 1.0).abs() < 1e-12);
    assert!((e.chibar.value.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn chi_u_model_tracks_limits() {
    let p = params(0.5, 0.7);
    let chi = chi_lambda(&p).unwrap();
    let near = chi_u_model(1.0 - 1e-7, &p).unwrap();
    assert!((near - chi).abs() < 0.01, "{near} vs {chi}");
    // χ̄(u) → 1 under asymptotic dependence, at rate 1/log t.
    let low = chibar_u_model(0.999, &p).unwrap();
    let high = chibar_u_model(1.0 - 1e-7, &p).unwrap();
    let lt = 1e7f64.ln();
    let predicted = 2.0 * lt / (lt - chi.ln()) - 1.0;
    assert!(high > low && (high - predicted).abs() < 0.01, "{low} {high} {predicted}");
}

#[test]
fn chibar_approaches_two_eta_minus_one_slowly() {
    // χ̄(u) = 2 log t / (log t/η - log c) - 1 with t = 1/(1-u): 2/(χ̄+1) is
    // linear in 1/log t with intercept 1/η = 1.5.
    let p = params(-0.5, 1.0);
    let c = Copula::new(p).unwrap();
    let ts = log_space(1e3, 1e7, 9);
    let x: Vec<f64> = ts.iter().map(|t| 1.0 / t.ln()).collect();
    let y: Vec<f64> = ts
        .iter()
        .map(|t| 2.0 / (model_chi(1.0 - 1.0 / t, &c).unwrap().chibar + 1.0))
        .collect();
    let (intercept, slope) = linear_fit(&x, &y);
    assert!((intercept - 1.5).abs() < 0.05, "intercept {intercept}");
    // The same relation reproduces the value at u = 1 - 1e-5.
    let at = chibar_u_model(0.99999, &p).unwrap();
    let predicted = 2.0 / (intercept + slope / 1e5f64.ln()) - 1.0;
    assert!((at - predicted).abs() < 0.01, "{at} vs {predicted}");
}

#[test]
fn chi_u_model_rejects_boundary() {
    let p = params(0.5, 0.7);
    assert!(chi_u_model(1.0, &p).is_err());
    assert!(chibar_u_model(0.0, &p).is_err());
    let c = Copula::new(p).unwrap();
    assert!(model_chi(1.0 - 1e-9, &c).unwrap().unstable);
}

#[test]
fn chi_u_empirical_examples() {
    let pts = vec![[0.96, 0.97], [0.2, 0.3], [0.98, 0.5], [0.99, 0.995]];
    let u = 0.95;
    let joint = pts.iter().filter(|p| p[0] > u && p[1] > u).count();
    let cond = pts.iter().filter(|p| p[1] > u).count();
    let e = chi_u_empirical(&sample(pts), u).unwrap();
    assert_eq!((e.n_joint, e.n_conditioning), (joint, cond));
    assert_eq!(e.chi.value, Some(joint as f64 / cond as f64));

    let g: Vec<f64> = (1..=200).map(|i| i as f64 / 201.0).collect();
    let comono = sample(g.iter().map(|&a| [a, a]).collect());
    for u in [0.5, 0.9, 0.99] {
        assert_eq!(chi_u_empirical(&comono, u).unwrap().chi.value, Some(1.0));
    }
    let anti = sample(g.iter().map(|&a| [a, 1.0 - a]).collect());
    let e = chi_u_empirical(&anti, 0.95).unwrap();
    assert_eq!(e.chi.value, Some(0.0));
    assert_eq!(e.chibar.status, EstimateStatus::Undefined);
    assert!(e.chibar.value.is_none());
}

#[test]
fn diagonal_tail_slope() {
    // log P(A > q(t), B > q(t)) against log t has slope -1/η = -1.5.
    let p = params(-0.5, 1.0);
    let c = Copula::new(p).unwrap();
    let ts = log_space(1e3, 1e6, 13);
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = ts.iter().map(|t| c.joint_exceedance(1.0 - 1.0 / t).unwrap().ln()).collect();
    let (_, slope) = linear_fit(&x, &y);
    assert!((slope + 1.5).abs() < 0.03, "slope {slope}");
}

#[test]
fn finite_joint_endpoint_under_l1() {
    let p = l1(-0.5, 1.0);
    for x in [1.0, 1.2, 1.9] {
        assert_eq!(joint_survivor(x, x, &p).unwrap(), 0.0);
    }
    assert!(joint_survivor(0.95, 0.95, &p).unwrap() > 0.0);
}
