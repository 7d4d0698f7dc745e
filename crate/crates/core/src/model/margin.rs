//! Pseudo-marginal law of `A = S V1` (equal in law to `B` for the symmetric
//! angle).

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::model::angular::{integrate_angle, integrate_angle_gap, integrate_angle_soft, BetaAngle, SoftEdges};
use crate::model::cache::SurvivorTable;
use crate::model::gp::Radial;
use crate::model::norm::NormSpec;
use crate::model::params::ModelParams;
use crate::numerics::roots::brent_root;
use crate::numerics::Tolerance;

/// Quadrature control for survivor-type integrals: tails far below any fixed
/// absolute floor still need relative accuracy.
pub(crate) const MARGIN_TOL: Tolerance = Tolerance {
    rel: 1e-10,
    abs: 0.0,
    max_intervals: 400,
};

const SOLVE_MAX_ITER: usize = 100;

/// A point on the pseudo-margin: `S(x) = survivor`, `f(x) = density`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginPoint {
    pub x: f64,
    pub survivor: f64,
    pub density: f64,
}

/// Survivor and density at `x` with their derivatives in `x`, `λ` and `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MarginJet {
    pub s: f64,
    pub f: f64,
    pub f_x: f64,
    pub s_lambda: f64,
    pub s_alpha: f64,
    pub f_lambda: f64,
    pub f_alpha: f64,
}

/// Evaluator for the pseudo-marginal survivor `S(x) = E K(x τ(V))`, its
/// density and quantile. Immutable once built.
#[derive(Debug, Clone)]
pub struct PseudoMargin {
    params: ModelParams,
    law: BetaAngle,
    radial: Radial,
    endpoint: f64,
    table: Option<SurvivorTable>,
}

impl PseudoMargin {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let radial = Radial::new(params.lambda);
        let endpoint = if radial.is_zero() || params.lambda > 0.0 {
            f64::INFINITY
        } else {
            -1.0 / params.lambda
        };
        Ok(Self {
            params,
            law: params.angle()?,
            radial,
            endpoint,
            table: None,
        })
    }

    /// As [`PseudoMargin::new`], plus an interpolation table for fast bulk
    /// evaluation of the CDF through [`PseudoMargin::cdf_fast`].
    pub fn with_cache(params: ModelParams) -> Result<Self> {
        let mut m = Self::new(params)?;
        m.table = Some(SurvivorTable::build(&m)?);
        Ok(m)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub(crate) fn law(&self) -> &BetaAngle {
        &self.law
    }

    pub(crate) fn radial(&self) -> Radial {
        self.radial
    }

    pub(crate) fn norm(&self) -> &NormSpec {
        &self.params.norm
    }

    /// Upper end `Λ` of the support.
    pub fn endpoint(&self) -> f64 {
        self.endpoint
    }

    pub fn has_cache(&self) -> bool {
        self.table.is_some()
    }

    /// Lower limit of the angles with `x τ(v) < Λ`, and the interior cuts.
    fn domain_at(&self, x: f64) -> (f64, [f64; 1]) {
        let lo = if self.endpoint.is_finite() {
            self.params.norm.tau_level_left(self.endpoint / x)
        } else {
            0.0
        };
        (lo, [self.params.norm.v_prime()])
    }

    /// Substitution order at the angular cut where `x τ(v)` reaches a
    /// finite endpoint. There the density integrand vanishes like
    /// `gap^{-1/λ - 1}`; the order makes the transformed integrand smooth.
    pub(crate) fn soft_order(&self) -> u32 {
        if self.endpoint.is_finite() {
            (6.0 * self.params.lambda.abs()).ceil().clamp(1.0, 8.0) as u32
        } else {
            1
        }
    }

    /// Order for [`PseudoMargin::jet`], whose `x` and `λ` derivatives of the
    /// density vanish one power slower, like `gap^{g - 1}` with
    /// `g = 1/|λ| - 1`. The order puts them at `s^2` after substitution,
    /// capped for `λ` near -1 where the bounded remainder `s^{32 g - 1}` is
    /// left to adaptive subdivision.
    pub(crate) fn jet_soft_order(&self) -> u32 {
        let lambda = self.params.lambda;
        if self.endpoint.is_finite() && lambda < 0.0 {
            let g = 1.0 / lambda.abs() - 1.0;
            (3.0 / g).ceil().clamp(f64::from(self.soft_order()), 32.0) as u32
        } else {
            self.soft_order()
        }
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(x >= 0.0) {
            return domain(format!("pseudo-margin argument must be nonnegative, got {x}"));
        }
        Ok(())
    }

    /// `(S(x), f(x))`.
    pub fn survivor_density(&self, x: f64) -> Result<(f64, f64)> {
        self.check_x(x)?;
        if x >= self.endpoint {
            return Ok((0.0, 0.0));
        }
        let (lo, cuts) = self.domain_at(x);
        let norm = self.params.norm;
        let radial = self.radial;
        let [s, f] = integrate_angle_soft(
            &self.law,
            |v, w| {
                let t = norm.tau(v, w);
                let r = x * t;
                match radial.base(r) {
                    Some(b) if r.is_finite() => {
                        let k = radial.survivor(r);
                        [k, t * k / b]
                    }
                    _ => [0.0, 0.0],
                }
            },
            lo,
            1.0,
            &cuts,
            SoftEdges { points: &[lo], order: self.soft_order() },
            MARGIN_TOL,
        )?;
        Ok((s.min(1.0), f))
    }

    /// `P(A > x)`.
    pub fn survivor(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        if x == 0.0 {
            return Ok(1.0);
        }
        Ok(self.survivor_density(x)?.0)
    }

    /// Density of `A`, by differentiating the survivor under the integral.
    /// Only the open support is covered.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return domain(format!("pseudo-marginal density needs x > 0, got {x}"));
        }
        Ok(self.survivor_density(x)?.1)
    }

    /// Survivor, density and their parameter derivatives at `x > 0`.
    pub(crate) fn jet(&self, x: f64) -> Result<MarginJet> {
        if !(x > 0.0) {
            return domain(format!("pseudo-margin jet needs x > 0, got {x}"));
        }
        let zero = MarginJet { s: 0.0, f: 0.0, f_x: 0.0, s_lambda: 0.0, s_alpha: 0.0, f_lambda: 0.0, f_alpha: 0.0 };
        if x >= self.endpoint {
            return Ok(zero);
        }
        let (lo, cuts) = self.domain_at(x);
        let norm = self.params.norm;
        let radial = self.radial;
        let law = self.law;
        let lambda = self.params.lambda;
        let v_prime = norm.v_prime();
        let v = integrate_angle_gap(
            &self.law,
            |v, w, gap| {
                let t = norm.tau(v, w);
                let r = x * t;
                // Next to the endpoint cut, 1 + λ x τ(lo) = 0 exactly, so
                // 1 + λ x τ(v) = -λ x {τ(lo) - τ(v)}. The x and λ derivatives
                // of the density grow like a negative power of this base,
                // which must therefore not be formed by cancellation.
                let exact = gap.filter(|_| v < v_prime).map(|g| -lambda * x * norm.tau_drop(lo, v, g));
                let (b, k, d) = match exact {
                    Some(b) if b > 0.0 => {
                        let ln_b = b.ln();
                        (b, (-ln_b / lambda).exp(), (ln_b - (b - 1.0) / b) / (lambda * lambda))
                    }
                    Some(_) => return [0.0; 7],
                    None => match radial.base(r) {
                        Some(b) if r.is_finite() => (b, radial.survivor(r), radial.dlog_survivor_dlambda(r)),
                        _ => return [0.0; 7],
                    },
                };
                let dens = t * k / b;
                let score = law.score_alpha(v, w);
                [k, dens, dens * t / b, k * d, k * score, dens * (d - r / b), dens * score]
            },
            lo,
            1.0,
            &cuts,
            SoftEdges { points: &[lo], order: self.jet_soft_order() },
            MARGIN_TOL,
        )?;
        Ok(MarginJet {
            s: v[0],
            f: v[1],
            f_x: -(1.0 + lambda) * v[2],
            s_lambda: v[3],
            s_alpha: v[4],
            f_lambda: v[5],
            f_alpha: v[6],
        })
    }

    fn check_p(p: f64) -> Result<()> {
        if !(p > 0.0 && p <= 1.0) {
            return domain(format!("exceedance probability must lie in (0, 1], got {p}"));
        }
        Ok(())
    }

    /// Quantile at exceedance probability `p`: the `x` with `S(x) = p`.
    ///
    /// Reference path: Brent's method on `log S(x) - log p` over a bracket
    /// grown geometrically from an asymptotic seed (or `[0, Λ]` for a finite
    /// endpoint).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        Self::check_p(p)?;
        if p == 1.0 {
            return Ok(0.0);
        }
        let ln_p = p.ln();
        let g = |x: f64| -> Result<f64> {
            let s = self.survivor(x)?;
            Ok(s.max(f64::MIN_POSITIVE).ln() - ln_p)
        };
        let (lo, hi) = if self.endpoint.is_finite() {
            (0.0, self.endpoint)
        } else {
            let mut hi = self.seed(p).max(1e-8);
            let mut lo = 0.0;
            let mut grown = 0;
            while g(hi)? > 0.0 {
                lo = hi;
                hi *= 4.0;
                grown += 1;
                if grown > 200 {
                    return Err(Error::Root(format!("no upper bracket for exceedance probability {p}")));
                }
            }
            (lo, hi)
        };
        brent_root(g, lo, hi, 1e-15 * hi.min(1e300), 1e-13, 300)
    }

    /// Starting point for quantile searches. `S(x) <= K(x)` because
    /// `τ >= 1`, so the radial quantile never undershoots.
    fn seed(&self, p: f64) -> f64 {
        if self.params.lambda > 0.0 && !self.radial.is_zero() {
            // Tail form S(x) ~ E(V1^{1/λ}) (λx)^{-1/λ}, bounded by the radial quantile.
            let m = self.radial_moment().unwrap_or(1.0);
            let tail = (m / p).powf(self.params.lambda) / self.params.lambda;
            tail.min(self.radial.quantile_from_survivor(p))
        } else {
            self.radial.quantile_from_survivor(p)
        }
    }

    /// `E(V1^{1/λ})` for `λ > 0`.
    pub(crate) fn radial_moment(&self) -> Result<f64> {
        radial_moment(&self.law, &self.params.norm, 1.0 / self.params.lambda)
    }

    /// Fast quantile: safeguarded Newton steps in `log x` (or in the log gap
    /// to a finite endpoint), optionally started from a nearby solution.
    pub fn solve(&self, p: f64, hint: Option<f64>) -> Result<MarginPoint> {
        Self::check_p(p)?;
        if p == 1.0 {
            return Ok(MarginPoint { x: 0.0, survivor: 1.0, density: f64::INFINITY });
        }
        let ln_p = p.ln();
        let (mut lo, mut hi) = (0.0, self.endpoint);
        let mut x = match hint {
            Some(h) if h > 0.0 && h < hi => h,
            _ => self.seed(p),
        };
        if !(x > 0.0 && x < hi) {
            x = if hi.is_finite() { 0.5 * hi } else { 1.0 };
        }
        for _ in 0..SOLVE_MAX_ITER {
            let (s, f) = self.survivor_density(x)?;
            let g = if s > 0.0 { s.ln() - ln_p } else { f64::NEG_INFINITY };
            if g.abs() < 1e-12 {
                return Ok(MarginPoint { x, survivor: s, density: f });
            }
            if g > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let newton = if s > 0.0 && f > 0.0 && g.is_finite() {
                let gap = self.endpoint - x;
                if gap.is_finite() && x > gap {
                    let step = (g * s / (f * gap)).clamp(-3.0, 3.0);
                    self.endpoint - gap * (-step).exp()
                } else {
                    let step = (g * s / (x * f)).clamp(-3.0, 3.0);
                    x * step.exp()
                }
            } else {
                f64::NAN
            };
            let next = if newton > lo && newton < hi {
                newton
            } else if hi.is_infinite() {
                4.0 * x.max(lo)
            } else if lo > 0.0 && hi > 4.0 * lo {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-15 * x || (hi.is_finite() && hi - lo <= 1e-15 * hi) {
                return Ok(MarginPoint { x, survivor: s, density: f });
            }
            x = next;
        }
        Err(Error::Root(format!("quantile for exceedance probability {p} did not converge")))
    }

    /// [`PseudoMargin::solve`] at many exceedance probabilities, in input
    /// order. Probabilities are visited in sorted runs so each solve starts
    /// from its neighbour's solution; runs are processed in parallel.
    pub fn solve_many(&self, ps: &[f64]) -> Result<Vec<MarginPoint>> {
        const RUN: usize = 32;
        let mut order: Vec<usize> = (0..ps.len()).collect();
        order.sort_by(|&i, &j| ps[j].total_cmp(&ps[i]));
        let solved: Vec<Vec<(usize, MarginPoint)>> = order
            .par_chunks(RUN)
            .map(|run| {
                let mut hint = None;
                let mut prev: Option<(f64, MarginPoint)> = None;
                run.iter()
                    .map(|&i| {
                        let pt = match prev {
                            Some((p, pt)) if p == ps[i] => pt,
                            _ => self.solve(ps[i], hint)?,
                        };
                        if pt.x > 0.0 && pt.x.is_finite() {
                            hint = Some(pt.x);
                        }
                        prev = Some((ps[i], pt));
                        Ok((i, pt))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut out = vec![MarginPoint { x: 0.0, survivor: 1.0, density: 0.0 }; ps.len()];
        for (i, pt) in solved.into_iter().flatten() {
            out[i] = pt;
        }
        Ok(out)
    }

    /// `P(A <= x)`, from the interpolation table when one was built and
    /// `x` lies inside it; exact otherwise.
    pub fn cdf_fast(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        if let Some(t) = &self.table {
            if let Some(ln_s) = t.ln_survivor(x) {
                return Ok(-ln_s.exp_m1());
            }
        }
        Ok(1.0 - self.survivor(x)?)
    }
}

/// `E(V1^power)` with `V1 = V / ‖(V, 1-V)‖ = 1/τ(V)`.
///
/// Evaluated as `exp(-power log τ)` so large powers decay smoothly instead
/// of underflowing; the integrand peaks where `τ` reaches one, with width
/// of order `1/power`, so the domain is cut around those points.
pub(crate) fn radial_moment(law: &BetaAngle, norm: &NormSpec, power: f64) -> Result<f64> {
    let mut cuts = peak_cuts(norm.v_prime(), 1.0 / power);
    cuts.extend(peak_cuts(1.0, 1.0 / power));
    let [m] = integrate_angle(
        law,
        |v, w| [(-power * norm.tau(v, w).ln()).exp()],
        0.0,
        1.0,
        &cuts,
        MARGIN_TOL,
    )?;
    Ok(m)
}

/// Breakpoints at geometric distances below and above `center`, for
/// integrands concentrated within about `width` of it.
pub(crate) fn peak_cuts(center: f64, width: f64) -> Vec<f64> {
    let mut out = vec![center];
    if width.is_finite() && width > 0.0 {
        for c in [0.25, 1.0, 4.0, 16.0] {
            out.push(center - c * width);
            out.push(center + c * width);
        }
    }
    out.retain(|v| *v > 0.0 && *v < 1.0 || *v == center);
    out
}
