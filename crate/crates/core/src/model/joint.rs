//! Joint law of `(A, B) = S (V1, V2)`.

use crate::error::{domain, Result};
use crate::model::angular::{integrate_angle_soft, AngularLaw, SoftEdges};
use crate::model::margin::{PseudoMargin, MARGIN_TOL};
use crate::model::params::ModelParams;

/// Joint density of `(A, B)`:
/// `‖(x,y)‖ / (x+y)² · (1 + λ‖(x,y)‖)_+^{-1/λ-1} · f_V(x/(x+y))`.
pub fn joint_density_ab(x: f64, y: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let margin = PseudoMargin::new(*params)?;
    Ok(ln_joint_density(&margin, x, y)?.exp())
}

/// `P(A > x, B > y)`.
pub fn joint_survivor(x: f64, y: f64, params: &ModelParams) -> Result<f64> {
    let margin = PseudoMargin::new(*params)?;
    joint_survivor_with(&margin, x, y)
}

pub(crate) fn ln_joint_density(m: &PseudoMargin, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return domain(format!("joint density needs x, y > 0, got ({x}, {y})"));
    }
    let radial = m.radial();
    let n = m.norm().norm(x, y);
    let Some(b) = radial.base(n) else {
        return Ok(f64::NEG_INFINITY);
    };
    let sum = x + y;
    let (r, rc) = (x / sum, y / sum);
    Ok(n.ln() - 2.0 * sum.ln() + radial.log_survivor(n) - b.ln() + m.law().ln_density(r, rc))
}

/// `log f_AB` with its partial derivatives `[value, ∂λ, ∂α, ∂x, ∂y]`.
pub(crate) fn ln_joint_density_grad(m: &PseudoMargin, x: f64, y: f64) -> Result<[f64; 5]> {
    let value = ln_joint_density(m, x, y)?;
    if !value.is_finite() {
        return Ok([value, 0.0, 0.0, 0.0, 0.0]);
    }
    let radial = m.radial();
    let norm = m.norm();
    let lambda = m.params().lambda;
    let alpha = m.params().alpha;
    let n = norm.norm(x, y);
    let b = radial.base(n).unwrap_or(1.0);
    let sum = x + y;
    let (r, rc) = (x / sum, y / sum);
    let d_lambda = radial.dlog_survivor_dlambda(n) - n / b;
    let d_alpha = m.law().score_alpha(r, rc);
    // d log k(s)/ds = -(1+λ)/(1+λs); d log f_V/dv = (α-1)(1/v - 1/(1-v))
    let dk = -(1.0 + lambda) / b;
    let dfv = (alpha - 1.0) * (1.0 / r - 1.0 / rc);
    let (nx, ny) = (norm.d_norm_dx(x, y), norm.d_norm_dx(y, x));
    let d_x = nx / n - 2.0 / sum + dk * nx + dfv * y / (sum * sum);
    let d_y = ny / n - 2.0 / sum + dk * ny - dfv * x / (sum * sum);
    Ok([value, d_lambda, d_alpha, d_x, d_y])
}

/// Angular integration limits and cuts for `E K(max(x τ(V), y τ(1-V)))`.
fn joint_domain(m: &PseudoMargin, x: f64, y: f64) -> (f64, f64, f64, Vec<f64>) {
    let r = x / (x + y);
    let norm = m.norm();
    let endpoint = m.endpoint();
    let (mut lo, mut hi) = (0.0, 1.0);
    if endpoint.is_finite() {
        if x > 0.0 {
            lo = norm.tau_level_left(endpoint / x).min(r);
        }
        if y > 0.0 {
            hi = (1.0 - norm.tau_level_left(endpoint / y)).max(r);
        }
    }
    let cuts = vec![r, norm.v_prime(), 1.0 - norm.v_prime()];
    (r, lo, hi, cuts)
}

pub(crate) fn joint_survivor_with(m: &PseudoMargin, x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return domain(format!("joint survivor needs x, y >= 0, got ({x}, {y})"));
    }
    if x == 0.0 && y == 0.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return m.survivor(y);
    }
    if y == 0.0 {
        return m.survivor(x);
    }
    let (r, lo, hi, cuts) = joint_domain(m, x, y);
    if !(hi > lo) {
        return Ok(0.0);
    }
    let norm = *m.norm();
    let radial = m.radial();
    let [s] = integrate_angle_soft(
        m.law(),
        |v, w| {
            let s = if v < r { x * norm.tau(v, w) } else { y * norm.tau(w, v) };
            [radial.survivor(s)]
        },
        lo,
        hi,
        &cuts,
        SoftEdges { points: &[lo, hi], order: m.soft_order() },
        MARGIN_TOL,
    )?;
    Ok(s.min(1.0))
}

/// `P(A > x, B > y)` and `[∂x, ∂y, ∂λ, ∂α]` of it, for `x, y > 0`.
pub(crate) fn joint_survivor_jet(m: &PseudoMargin, x: f64, y: f64) -> Result<[f64; 5]> {
    if !(x > 0.0 && y > 0.0) {
        return domain(format!("joint survivor jet needs x, y > 0, got ({x}, {y})"));
    }
    let (r, lo, hi, cuts) = joint_domain(m, x, y);
    if !(hi > lo) {
        return Ok([0.0; 5]);
    }
    let norm = *m.norm();
    let radial = m.radial();
    let law = *m.law();
    integrate_angle_soft(
        m.law(),
        |v, w| {
            let left = v < r;
            let t = if left { norm.tau(v, w) } else { norm.tau(w, v) };
            let s = if left { x * t } else { y * t };
            let Some(b) = radial.base(s) else {
                return [0.0; 5];
            };
            let k = radial.survivor(s);
            let dk = -t * k / b;
            let d = radial.dlog_survivor_dlambda(s);
            let score = law.score_alpha(v, w);
            if left {
                [k, dk, 0.0, k * d, k * score]
            } else {
                [k, 0.0, dk, k * d, k * score]
            }
        },
        lo,
        hi,
        &cuts,
        SoftEdges { points: &[lo, hi], order: m.soft_order() },
        MARGIN_TOL,
    )
}

/// `P(x1 < A <= x2, y1 < B <= y2)`, integrated directly as
/// `E[K(lo) - K(hi)]_+` over the angle with `lo = max(x1 τ(V), y1 τ(1-V))`
/// and `hi = min(x2 τ(V), y2 τ(1-V))`. Upper limits may be infinite.
pub(crate) fn joint_box(m: &PseudoMargin, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    if !(x[0] >= 0.0 && y[0] >= 0.0 && x[1] > x[0] && y[1] > y[0]) {
        return Ok(0.0);
    }
    let norm = *m.norm();
    let radial = m.radial();
    let endpoint = m.endpoint();
    let mut cuts = vec![norm.v_prime(), 1.0 - norm.v_prime()];
    for &xi in &x {
        for &yj in &y {
            if xi > 0.0 && yj > 0.0 && (xi + yj).is_finite() {
                cuts.push(xi / (xi + yj));
            }
        }
    }
    let mut soft = Vec::new();
    if endpoint.is_finite() {
        if x[0] > 0.0 {
            soft.push(norm.tau_level_left(endpoint / x[0]));
        }
        if y[0] > 0.0 {
            soft.push(1.0 - norm.tau_level_left(endpoint / y[0]));
        }
    }
    cuts.extend_from_slice(&soft);
    let [p] = integrate_angle_soft(
        m.law(),
        |v, w| {
            let (ta, tb) = (norm.tau(v, w), norm.tau(w, v));
            let lo = (x[0] * ta).max(y[0] * tb);
            let hi = (x[1] * ta).min(y[1] * tb);
            if !(hi > lo) {
                return [0.0];
            }
            let ln_lo = radial.log_survivor(lo);
            if ln_lo == f64::NEG_INFINITY {
                return [0.0];
            }
            let ln_hi = radial.log_survivor(hi);
            [ln_lo.exp() * -(ln_hi - ln_lo).exp_m1()]
        },
        0.0,
        1.0,
        &cuts,
        SoftEdges { points: &soft, order: m.soft_order() },
        MARGIN_TOL,
    )?;
    Ok(p.max(0.0))
}
