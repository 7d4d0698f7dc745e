//! Nelder–Mead downhill simplex minimization.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Converged when the spread of function values falls below this.
    pub ftol: f64,
    /// ...and every vertex lies within this distance of the best one.
    pub xtol: f64,
    pub max_evals: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.2,
            ftol: 1e-7,
            xtol: 1e-5,
            max_evals: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimize `f` starting from `x0`. Non-finite objective values are
/// treated as `+inf`, so the simplex retreats from invalid regions.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: SimplexOptions) -> Result<SimplexResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = f(x)?;
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals = Vec::with_capacity(n + 1);
    for p in &pts {
        vals.push(eval(p, &mut evals)?);
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;
    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = (vals[n] - vals[0]).abs();
        let size = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.ftol && size <= opts.xtol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr, &mut evals)?;
        if fr < vals[0] {
            let xe = along(gamma);
            let fe = eval(&xe, &mut evals)?;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(rho);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc, &mut evals)?;
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        for i in 1..=n {
            let p: Vec<f64> = pts[0].iter().zip(&pts[i]).map(|(b, x)| b + sigma * (x - b)).collect();
            vals[i] = eval(&p, &mut evals)?;
            pts[i] = p;
        }
    }

    let best = (0..=n).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    Ok(SimplexResult {
        x: pts[best].clone(),
        fx: vals[best],
        evals,
        converged,
    })
}
