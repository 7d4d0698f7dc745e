//! Law of the angular variable `V` and expectations over it.

use statrs::function::beta::beta_reg;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{domain, Result};
use crate::numerics::quadrature::{breakpoints, integrate, Tolerance};

/// Density/CDF interface for the law of `V` on `[0, 1]`.
///
/// Densities may be singular at the edges like `v^{a0-1}` and
/// `(1-v)^{a1-1}`; [`integrate_angle`] removes those factors by substitution.
pub trait AngularLaw: Send + Sync {
    /// `(a0, a1)`: edge behaviour exponents at 0 and 1.
    fn edge_exponents(&self) -> (f64, f64);

    /// `log f(v) - (a0-1) log v - (a1-1) log w`, where `w = 1 - v`.
    fn ln_density_core(&self, v: f64, w: f64) -> f64;

    fn cdf(&self, v: f64) -> f64;

    fn ln_density(&self, v: f64, w: f64) -> f64 {
        let (a0, a1) = self.edge_exponents();
        let mut out = self.ln_density_core(v, w);
        if a0 != 1.0 {
            out += (a0 - 1.0) * v.ln();
        }
        if a1 != 1.0 {
            out += (a1 - 1.0) * w.ln();
        }
        out
    }

    fn density(&self, v: f64) -> f64 {
        if !(0.0..=1.0).contains(&v) {
            return 0.0;
        }
        self.ln_density(v, 1.0 - v).exp()
    }
}

/// Symmetric `Beta(α, α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaAngle {
    alpha: f64,
    ln_beta: f64,
    // 2ψ(2α) - 2ψ(α)
    score_shift: f64,
}

impl BetaAngle {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("Beta shape must be positive, got {alpha}"));
        }
        Ok(Self {
            alpha,
            ln_beta: 2.0 * ln_gamma(alpha) - ln_gamma(2.0 * alpha),
            score_shift: 2.0 * digamma(2.0 * alpha) - 2.0 * digamma(alpha),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `∂/∂α log f(v)`.
    #[inline]
    pub fn score_alpha(&self, v: f64, w: f64) -> f64 {
        v.ln() + w.ln() + self.score_shift
    }
}

impl AngularLaw for BetaAngle {
    fn edge_exponents(&self) -> (f64, f64) {
        (self.alpha, self.alpha)
    }

    fn ln_density_core(&self, _v: f64, _w: f64) -> f64 {
        -self.ln_beta
    }

    fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            0.0
        } else if v >= 1.0 {
            1.0
        } else {
            beta_reg(self.alpha, self.alpha, v)
        }
    }
}

/// Interior limits where the integrand vanishes like a fractional power of
/// the distance to the limit (a finite radial endpoint), with the order `m`
/// of the substitution `v = a + (b - a) s^m` that flattens them.
#[derive(Debug, Clone, Copy, Default)]
pub struct SoftEdges<'a> {
    pub points: &'a [f64],
    pub order: u32,
}

enum Piece {
    Plain { a: f64, b: f64 },
    // v = a + (b - a) s^m, or v = b - (b - a) s^m when `from_right`
    Power { a: f64, b: f64, m: i32, from_right: bool },
    // v = b s^k
    Left { b: f64, k: f64, scale: f64 },
    // 1 - v = c s^k
    Right { c: f64, k: f64, scale: f64 },
}

/// `∫_lo^hi g(v, 1-v) f(v) dv` for the density `f` of `law`.
///
/// `cuts` lists interior points where `g` is not smooth. Pieces touching a
/// singular edge are integrated after the substitution `v = b s^{1/a}`,
/// which makes the weighted integrand bounded. `g` is never called at
/// `v = 0` or `v = 1`.
pub fn integrate_angle<L, F, const N: usize>(law: &L, g: F, lo: f64, hi: f64, cuts: &[f64], tol: Tolerance) -> Result<[f64; N]>
where
    L: AngularLaw + ?Sized,
    F: FnMut(f64, f64) -> [f64; N],
{
    integrate_angle_soft(law, g, lo, hi, cuts, SoftEdges::default(), tol)
}

/// [`integrate_angle`] with power substitutions at the `soft` limits.
pub fn integrate_angle_soft<L, F, const N: usize>(
    law: &L,
    mut g: F,
    lo: f64,
    hi: f64,
    cuts: &[f64],
    soft: SoftEdges<'_>,
    tol: Tolerance,
) -> Result<[f64; N]>
where
    L: AngularLaw + ?Sized,
    F: FnMut(f64, f64) -> [f64; N],
{
    integrate_angle_gap(law, |v, w, _| g(v, w), lo, hi, cuts, soft, tol)
}

/// [`integrate_angle_soft`], also passing `g` the exact offset `v - a` when
/// `v` lies on a piece that starts at a soft limit `a`. Quantities that
/// vanish at the limit can then be formed without cancellation.
pub fn integrate_angle_gap<L, F, const N: usize>(
    law: &L,
    mut g: F,
    lo: f64,
    hi: f64,
    cuts: &[f64],
    soft: SoftEdges<'_>,
    tol: Tolerance,
) -> Result<[f64; N]>
where
    L: AngularLaw + ?Sized,
    F: FnMut(f64, f64, Option<f64>) -> [f64; N],
{
    let m = soft.order.max(1) as i32;
    let is_soft = |p: f64| m > 1 && soft.points.contains(&p);
    let (a0, a1) = law.edge_exponents();
    let mut pts = breakpoints(lo, hi, cuts);
    if pts.len() == 2 && lo == 0.0 && hi == 1.0 && a0 < 1.0 && a1 < 1.0 {
        pts = vec![0.0, 0.5, 1.0];
    }
    let pieces: Vec<Piece> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if a == 0.0 && a0 < 1.0 {
                Piece::Left { b, k: 1.0 / a0, scale: b.powf(a0) / a0 }
            } else if b == 1.0 && a1 < 1.0 {
                let c = 1.0 - a;
                Piece::Right { c, k: 1.0 / a1, scale: c.powf(a1) / a1 }
            } else if is_soft(a) {
                Piece::Power { a, b, m, from_right: false }
            } else if is_soft(b) {
                Piece::Power { a, b, m, from_right: true }
            } else {
                Piece::Plain { a, b }
            }
        })
        .collect();
    if pieces.is_empty() {
        return Ok([0.0; N]);
    }

    let grid: Vec<f64> = (0..=pieces.len()).map(|i| i as f64).collect();
    integrate(
        |t: f64| {
            let i = (t.floor() as usize).min(pieces.len() - 1);
            let s = (t - i as f64).clamp(0.0, 1.0);
            let mut gap = None;
            let (v, w, weight) = match pieces[i] {
                Piece::Plain { a, b } => {
                    let v = a + (b - a) * s;
                    let w = 1.0 - v;
                    if v <= 0.0 || w <= 0.0 {
                        return [0.0; N];
                    }
                    (v, w, (b - a) * law.ln_density(v, w).exp())
                }
                Piece::Power { a, b, m, from_right } => {
                    let d = (b - a) * s.powi(m);
                    let v = if from_right { b - d } else { a + d };
                    if !from_right {
                        gap = Some(d);
                    }
                    let w = 1.0 - v;
                    if v <= 0.0 || w <= 0.0 {
                        return [0.0; N];
                    }
                    (v, w, f64::from(m) * (b - a) * s.powi(m - 1) * law.ln_density(v, w).exp())
                }
                Piece::Left { b, k, scale } => {
                    let v = b * s.powf(k);
                    let w = 1.0 - v;
                    if v <= 0.0 {
                        return [0.0; N];
                    }
                    let mut ln_wt = law.ln_density_core(v, w);
                    if a1 != 1.0 {
                        ln_wt += (a1 - 1.0) * w.ln();
                    }
                    (v, w, scale * ln_wt.exp())
                }
                Piece::Right { c, k, scale } => {
                    let w = c * s.powf(k);
                    let v = 1.0 - w;
                    if w <= 0.0 {
                        return [0.0; N];
                    }
                    let mut ln_wt = law.ln_density_core(v, w);
                    if a0 != 1.0 {
                        ln_wt += (a0 - 1.0) * v.ln();
                    }
                    (v, w, scale * ln_wt.exp())
                }
            };
            if weight == 0.0 {
                return [0.0; N];
            }
            let mut out = g(v, w, gap);
            for o in out.iter_mut() {
                *o *= weight;
            }
            out
        },
        &grid,
        tol,
    )
}
