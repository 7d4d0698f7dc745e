mod common;

use std::sync::OnceLock;

use common::*;
use evdep::inference::*;
use evdep::model::{copula_density, Copula};
use evdep::simulate::{monte_carlo_rects, sample_model, Structure};
use evdep::{ModelParams, NormSpec, Provenance, UniformSample};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1};

fn params(lambda: f64, alpha: f64) -> ModelParams {
    ModelParams::new(lambda, alpha).unwrap()
}

fn no_ci() -> FitConfig {
    FitConfig { ci_level: None, ..FitConfig::default() }
}

// Model sample of size 2000 at (0.5, 0.7) and its fit with 95% intervals.
fn shared_fit() -> &'static (UniformSample, FitResult) {
    static CELL: OnceLock<(UniformSample, FitResult)> = OnceLock::new();
    CELL.get_or_init(|| {
        let raw = sample_model(&params(0.5, 0.7), 2000, 17).unwrap();
        let s = rank_transform(raw.pairs()).unwrap();
        let f = fit(&s, &FitConfig::default()).unwrap();
        (s, f)
    })
}

fn column(u: &UniformSample, j: usize) -> Vec<f64> {
    u.pairs().iter().map(|p| p[j]).collect()
}

#[test]
fn rank_transform_examples() {
    let u = rank_transform(&[[3.0, 5.0], [1.0, 5.0], [2.0, 1.0]]).unwrap();
    assert_eq!(column(&u, 0), vec![0.75, 0.25, 0.5]);
    assert_eq!(column(&u, 1), vec![0.625, 0.625, 0.25]);
    assert!(rank_transform(&[[1.0, 2.0]]).is_err());
    assert!(rank_transform(&[[1.0, f64::NAN], [2.0, 3.0]]).is_err());
}

proptest! {
    #[test]
    fn ranks_match_brute_force(xs in prop::collection::hash_set(-1000i32..1000, 10)) {
        let x: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let data: Vec<[f64; 2]> = x.iter().map(|&a| [a, -a]).collect();
        let u = rank_transform(&data).unwrap();
        for (i, &xi) in x.iter().enumerate() {
            let below = x.iter().filter(|&&xj| xj < xi).count();
            prop_assert_eq!(u.pairs()[i][0], (below + 1) as f64 / 11.0);
            prop_assert_eq!(u.pairs()[i][1], (10 - below) as f64 / 11.0);
        }
    }

    #[test]
    fn rank_transform_is_idempotent(data in prop::collection::vec((0i32..50, 0i32..50), 2..40)) {
        let data: Vec<[f64; 2]> = data.into_iter().map(|(a, b)| [f64::from(a), f64::from(b)]).collect();
        let once = rank_transform(&data).unwrap();
        let twice = rank_transform(once.pairs()).unwrap();
        prop_assert_eq!(once.pairs(), twice.pairs());
    }
}

fn exponential_pairs(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| [Exp1.sample(&mut rng), Exp1.sample(&mut rng)]).collect()
}

#[test]
fn semiparametric_transform_examples() {
    // n = 1001 puts the 0.9 sample quantile exactly on an order statistic.
    let data = exponential_pairs(1001, 5);
    let ranks = rank_transform(&data).unwrap();
    let semi = semiparametric_transform(&data, 0.9).unwrap();
    assert!(!semi.fell_back());
    let mut sorted: Vec<f64> = data.iter().map(|p| p[0]).collect();
    sorted.sort_by(f64::total_cmp);
    let threshold = sorted[900];
    for (i, p) in data.iter().enumerate() {
        let u = semi.sample.pairs()[i][0];
        if p[0] < threshold {
            assert_eq!(u, ranks.pairs()[i][0]);
        } else if p[0] == threshold {
            assert!((u - 0.9).abs() < 1e-15);
            // continuity at the splice
            assert!((u - ranks.pairs()[i][0]).abs() <= 1.0 / 1002.0);
        } else {
            assert!(u > 0.9 && u < 1.0);
        }
    }
}

#[test]
fn semiparametric_transform_is_uniform() {
    let data = exponential_pairs(5000, 6);
    let semi = semiparametric_transform(&data, 0.9).unwrap();
    assert!(!semi.fell_back());
    for j in 0..2 {
        let d = ks_uniform(column(&semi.sample, j));
        assert!(d < ks_critical_1pct(5000), "margin {j}: KS {d}");
    }
}

#[test]
fn semiparametric_falls_back_with_few_exceedances() {
    let data = exponential_pairs(100, 7);
    let semi = semiparametric_transform(&data, 0.9).unwrap();
    assert!(semi.fell_back());
    assert_eq!(semi.sample.pairs(), rank_transform(&data).unwrap().pairs());
}

#[test]
fn censored_loglik_examples() {
    let p = params(0.4, 1.3);
    let u = 0.95;
    let c = Copula::new(p).unwrap();
    let corner = c.cdf(u, u).unwrap().ln();

    let censored = UniformSample::new(vec![[0.1, 0.2], [0.5, 0.9], [0.94, 0.3]], Provenance::Simulated).unwrap();
    let ll = censored_loglik(&p, &censored, u).unwrap();
    assert_eq!(ll.n_exceed, 0);
    assert!((ll.value - 3.0 * corner).abs() < 1e-12);

    let one = UniformSample::new(vec![[0.97, 0.5], [0.1, 0.2], [0.5, 0.9]], Provenance::Simulated).unwrap();
    let ll = censored_loglik(&p, &one, u).unwrap();
    let expected = copula_density(0.97, 0.5, &p).unwrap().ln() + 2.0 * corner;
    assert_eq!((ll.n_exceed, ll.n_censored), (1, 2));
    assert!((ll.value - expected).abs() < 1e-10, "{} vs {expected}", ll.value);
}

#[test]
fn censored_loglik_gradient_matches_differences() {
    let s = rank_transform(sample_model(&params(0.4, 1.0), 200, 8).unwrap().pairs()).unwrap();
    let at = |l: f64, a: f64| censored_loglik(&params(l, a), &s, 0.95).unwrap().value;
    let (l, a) = (0.3, 1.2);
    let (_, g) = censored_loglik_grad(&params(l, a), &s, 0.95).unwrap();
    let h = 1e-5;
    let fd = [(at(l + h, a) - at(l - h, a)) / (2.0 * h), (at(l, a + h) - at(l, a - h)) / (2.0 * h)];
    for k in 0..2 {
        assert!(((g[k] - fd[k]) / fd[k]).abs() < 1e-4, "component {k}: {} vs {}", g[k], fd[k]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn censored_loglik_permutation_invariant(seed in 0u64..1000) {
        let s = rank_transform(sample_model(&params(-0.2, 1.5), 300, 9).unwrap().pairs()).unwrap();
        let mut pairs = s.pairs().to_vec();
        pairs.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
        let shuffled = UniformSample::new(pairs, Provenance::Simulated).unwrap();
        let p = params(-0.2, 1.5);
        let a = censored_loglik(&p, &s, 0.95).unwrap().value;
        let b = censored_loglik(&p, &shuffled, 0.95).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9 * a.abs());
    }
}

#[test]
fn fit_requires_uncensored_pairs() {
    let s = UniformSample::new(vec![[0.2, 0.3], [0.5, 0.6], [0.9, 0.1]], Provenance::Simulated).unwrap();
    let err = fit(&s, &no_ci()).unwrap_err();
    assert!(matches!(err, evdep::Error::NoUncensoredPairs), "{err:?}");
    let bad = FitConfig { starts: vec![], ..FitConfig::default() };
    assert!(fit(&s, &bad).is_err());
    let bad = FitConfig { censor_u: 1.0, ..FitConfig::default() };
    assert!(fit(&s, &bad).is_err());
}

#[test]
fn fit_is_invariant_to_swapping_coordinates() {
    let s = rank_transform(Structure::Logistic { dep: 0.5 }.sample(800, 10, 0).unwrap().pairs()).unwrap();
    let a = fit(&s, &no_ci()).unwrap();
    let b = fit(&s.swapped(), &no_ci()).unwrap();
    assert!((a.loglik - b.loglik).abs() < 1e-6, "{} vs {}", a.loglik, b.loglik);
    assert!((a.params_hat.lambda - b.params_hat.lambda).abs() < 1e-3);
    assert!((a.params_hat.alpha - b.params_hat.alpha).abs() < 1e-3 * a.params_hat.alpha);
}

#[test]
fn fit_result_invariants() {
    let (s, f) = shared_fit();
    assert!(f.loglik.is_finite() && f.converged);
    assert!(f.params_hat.lambda <= 1.0 && f.params_hat.alpha > 0.0);
    assert_eq!(f.n, s.len());
    let ll = censored_loglik(&f.params_hat, s, 0.95).unwrap();
    assert_eq!(f.n_exceed, ll.n_exceed);
    assert!((ll.value - f.loglik).abs() < 1e-9);
    for which in [Param::Lambda, Param::Alpha] {
        let ci = f.interval(which).unwrap();
        assert!(ci.contains(ci.estimate), "{ci:?}");
    }
}

#[test]
fn profile_intervals_nest_and_hit_the_cutoff() {
    let (s, f) = shared_fit();
    let config = FitConfig::default();
    let nll_hat = -f.loglik;
    for which in [Param::Lambda, Param::Alpha] {
        let ci95 = *f.interval(which).unwrap();
        let ci99 = profile_ci(s, &config, f, which, 0.99).unwrap();
        assert!(ci99.lower.value <= ci95.lower.value && ci95.upper.value <= ci99.upper.value, "{ci95:?} {ci99:?}");

        let cutoff = 3.841458820694124;
        for b in [ci95.lower, ci95.upper] {
            if b.status != BoundStatus::Found {
                continue;
            }
            let (theta, warm) = match which {
                Param::Lambda => (b.value, f.params_hat.alpha.ln()),
                Param::Alpha => (b.value.ln(), f.params_hat.lambda),
            };
            let (nll, _) = profile_nll(s, &config, which, theta, warm).unwrap();
            let dev = 2.0 * (nll - nll_hat);
            assert!((dev - cutoff).abs() < 1e-3, "{which} endpoint {}: deviance {dev}", b.value);
        }
    }
}

fn recovery_share(structure: Structure, accept: impl Fn(f64) -> bool) -> usize {
    (0..50)
        .filter(|&r| {
            let s = rank_transform(structure.sample(5000, 2024, r).unwrap().pairs()).unwrap();
            fit(&s, &no_ci()).map(|f| accept(f.params_hat.lambda)).unwrap_or(false)
        })
        .count()
}

#[test]
fn fit_recovers_dependence_parameter() {
    let hits = recovery_share(Structure::NewModel { lambda: 0.5, alpha: 0.7 }, |l| l > 0.2 && l < 0.8);
    assert!(hits >= 45, "{hits} of 50 replicates in (0.2, 0.8)");
}

#[test]
fn fit_detects_gaussian_asymptotic_independence() {
    let hits = recovery_share(Structure::GaussianCopula { rho: 0.6 }, |l| l < 0.0);
    assert!(hits >= 45, "{hits} of 50 replicates with negative λ");
}

#[test]
fn surface_examples() {
    let (s, f) = shared_fit();
    let p = f.params_hat;
    let one = loglik_surface(s, 0.95, NormSpec::Linf, &[p.lambda], &[p.alpha]).unwrap();
    assert!((one[0][0] + f.loglik).abs() < 1e-9);

    let lambdas = [0.2, 0.5, 0.8];
    let alphas = [0.5, 1.0];
    let a = loglik_surface(s, 0.95, NormSpec::Linf, &lambdas, &alphas).unwrap();
    let b = loglik_surface(&s.swapped(), 0.95, NormSpec::Linf, &lambdas, &alphas).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-9 * x.abs());
        }
    }
    assert!(loglik_surface(s, 0.95, NormSpec::Linf, &[], &alphas).is_err());
}

#[test]
fn surface_argmin_neighbours_the_optimum() {
    let (s, f) = shared_fit();
    let p = f.params_hat;
    let lambdas: Vec<f64> = (0..11).map(|i| (p.lambda - 0.25 + 0.05 * i as f64).min(1.0)).collect();
    let alphas: Vec<f64> = (0..11).map(|j| p.alpha * (0.6 + 0.08 * j as f64)).collect();
    let grid = loglik_surface(s, 0.95, NormSpec::Linf, &lambdas, &alphas).unwrap();
    let (mut bi, mut bj) = (0, 0);
    for i in 0..lambdas.len() {
        for j in 0..alphas.len() {
            if grid[i][j] < grid[bi][bj] {
                (bi, bj) = (i, j);
            }
        }
    }
    let nearest = |xs: &[f64], x: f64| (0..xs.len()).min_by(|&a, &b| (xs[a] - x).abs().total_cmp(&(xs[b] - x).abs())).unwrap();
    let (ni, nj) = (nearest(&lambdas, p.lambda), nearest(&alphas, p.alpha));
    assert!(bi.abs_diff(ni) <= 1 && bj.abs_diff(nj) <= 1, "argmin ({bi},{bj}) vs MLE cell ({ni},{nj})");
    assert!(grid[bi][bj] - (-f.loglik) < 0.5);
}

#[test]
fn rect_prob_examples() {
    let p = params(0.5, 0.7);
    assert_eq!(rect_prob(&p, &RectRegion::whole()).unwrap().prob, 1.0);
    let strip = rect_prob(&p, &RectRegion::new(0.0, 1.0, 0.995, 1.0).unwrap()).unwrap();
    assert!((strip.prob - 0.005).abs() < 1e-12);
    assert!(RectRegion::new(0.5, 0.4, 0.0, 1.0).is_err());
    assert!(RectRegion::new(0.0, 1.2, 0.0, 1.0).is_err());
    let set5 = RectRegion::preset("set5").unwrap();
    assert_eq!((set5.u1, set5.v1, set5.u2, set5.v2), (0.8, 0.9999, 0.995, 0.99995));
}

#[test]
fn rect_prob_zero_rule() {
    let tiny = RectProb::from_raw(1e-17);
    assert_eq!(tiny.prob, 0.0);
    assert!(tiny.below_2eps);
    let neg = RectProb::from_raw(-3e-12);
    assert_eq!(neg.prob, 0.0);
    assert!(neg.below_2eps);
    let ok = RectProb::from_raw(1e-9);
    assert_eq!(ok.prob, 1e-9);
    assert!(!ok.below_2eps);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rect_partition_sums_to_one(a in 0.01f64..0.99, b in 0.01f64..0.99, l in -0.9f64..1.0, al in 0.3f64..3.0) {
        let c = Copula::new(params(l, al)).unwrap();
        let parts = [
            RectRegion::new(0.0, a, 0.0, b).unwrap(),
            RectRegion::new(a, 1.0, 0.0, b).unwrap(),
            RectRegion::new(0.0, a, b, 1.0).unwrap(),
            RectRegion::new(a, 1.0, b, 1.0).unwrap(),
        ];
        let total: f64 = parts.iter().map(|r| rect_prob_with(&c, r).unwrap().prob).sum();
        prop_assert!((total - 1.0).abs() < 1e-8, "{}", total);
    }
}

#[test]
fn set5_probability_matches_monte_carlo() {
    let (_, f) = shared_fit();
    let p = f.params_hat;
    let set5 = RectRegion::preset("set5").unwrap();
    let exact = rect_prob(&p, &set5).unwrap().prob;
    let mc = monte_carlo_rects(&Structure::NewModel { lambda: p.lambda, alpha: p.alpha }, &[set5], 100_000_000, 31).unwrap();
    assert!((mc[0].prob - exact).abs() < 3.0 * mc[0].std_error, "exact {exact}, MC {:?}", mc[0]);
}

#[test]
fn sv_diagnostic_on_model_sample() {
    let n = 5000;
    let p = params(0.5, 0.7);
    let s = sample_model(&p, n, 12).unwrap();
    let d = sv_diagnostic(&p, &s, 0.9).unwrap();
    assert_eq!(d.status, SvStatus::Ok);
    assert!(d.raw.len().abs_diff(500) <= 1, "{} retained", d.raw.len());
    let tau = d.kendall_tau.unwrap();
    assert!(tau.abs() < 0.1, "τ = {tau}");
}

#[test]
fn sv_diagnostic_on_comonotone_sample() {
    let g: Vec<[f64; 2]> = (1..=400).map(|i| [i as f64 / 401.0; 2]).collect();
    let s = UniformSample::new(g, Provenance::EmpiricalTransformed).unwrap();
    let d = sv_diagnostic(&params(0.3, 1.0), &s, 0.9).unwrap();
    assert!(d.raw.len().abs_diff(40) <= 1);
    assert!(d.raw.iter().all(|p| p[1] == 0.5));
    let few = sv_diagnostic(&params(0.3, 1.0), &s, 0.99).unwrap();
    assert_eq!(few.status, SvStatus::TooFewRetained);
}
