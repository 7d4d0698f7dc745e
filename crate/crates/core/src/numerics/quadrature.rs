//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature for vector-valued
//! integrands.
//!
//! Every component shares the same subdivision. A subinterval is refined
//! while any component's error estimate exceeds its tolerance share, so the
//! integrand should group quantities of comparable smoothness.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_081_579_166,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-14,
            max_intervals: 400,
        }
    }
}

impl Tolerance {
    /// Relative-only control, for tail probabilities that may be far below
    /// any fixed absolute floor.
    pub fn relative(rel: f64) -> Self {
        Self {
            rel,
            abs: 0.0,
            max_intervals: 400,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    // estimate of the integral of |f|
    magnitude: [f64; N],
    error: [f64; N],
    roundoff: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl<const N: usize> Eq for Segment<N> {}
impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn kronrod<F, const N: usize>(f: &mut F, a: f64, b: f64) -> Segment<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut res_k = [0.0; N];
    let mut res_g = [0.0; N];
    let mut res_abs = [0.0; N];
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];
    for i in 0..N {
        res_k[i] = WGK[10] * fc[i];
        res_abs[i] = res_k[i].abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for i in 0..N {
            let s = f1[i] + f2[i];
            res_k[i] += WGK[j] * s;
            res_abs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                res_g[i] += WG[j / 2] * s;
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }

    let mut value = [0.0; N];
    let mut magnitude = [0.0; N];
    let mut error = [0.0; N];
    let mut roundoff = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * res_k[i];
        let mut res_asc = WGK[10] * (fc[i] - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        let h = half.abs();
        value[i] = res_k[i] * half;
        magnitude[i] = res_abs[i] * h;
        error[i] = rescale_error((res_k[i] - res_g[i]) * half, res_abs[i] * h, res_asc * h);
        roundoff[i] = 50.0 * f64::EPSILON * res_abs[i] * h;
    }
    Segment {
        a,
        b,
        value,
        magnitude,
        error,
        roundoff,
        priority: 0.0,
    }
}

/// Integrate `f` over consecutive pieces `[p0,p1], [p1,p2], ...`.
///
/// `points` must be sorted; degenerate pieces are skipped. Errors are
/// pooled over all pieces and the worst piece is bisected until every
/// component meets `max(abs, rel * ∫|f|)` or only roundoff remains. Measuring
/// the relative budget against `∫|f|` keeps sign-changing components with a
/// near-zero integral from stalling the refinement.
pub fn integrate<F, const N: usize>(mut f: F, points: &[f64], tol: Tolerance) -> Result<[f64; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut heap: BinaryHeap<Segment<N>> = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, w[0], w[1]));
        }
    }
    if heap.is_empty() {
        return Ok([0.0; N]);
    }

    loop {
        let mut total = [0.0; N];
        let mut mag = [0.0; N];
        let mut err = [0.0; N];
        let mut round = [0.0; N];
        for s in heap.iter() {
            for i in 0..N {
                total[i] += s.value[i];
                mag[i] += s.magnitude[i];
                err[i] += s.error[i];
                round[i] += s.roundoff[i];
            }
        }
        let budget: [f64; N] = std::array::from_fn(|i| tol.abs.max(tol.rel * mag[i]));
        let done = (0..N).all(|i| err[i] <= budget[i] || err[i] <= 2.0 * round[i]);
        if done {
            return Ok(total);
        }
        if heap.len() >= tol.max_intervals {
            let worst = (0..N)
                .max_by(|&i, &j| (err[i] / budget[i].max(f64::MIN_POSITIVE))
                    .total_cmp(&(err[j] / budget[j].max(f64::MIN_POSITIVE))))
                .unwrap_or(0);
            return Err(Error::Quadrature {
                estimate: total[worst],
                error: err[worst],
                intervals: heap.len(),
            });
        }

        // Re-rank segments against the current budget: a segment's priority is
        // its largest error relative to the tolerance of that component.
        let mut segs: Vec<Segment<N>> = heap.into_vec();
        for s in segs.iter_mut() {
            s.priority = (0..N)
                .map(|i| {
                    let e = if s.error[i] <= s.roundoff[i] { 0.0 } else { s.error[i] };
                    e / budget[i].max(f64::MIN_POSITIVE)
                })
                .fold(0.0, f64::max);
        }
        heap = BinaryHeap::from(segs);

        // Split a handful of the worst segments per pass.
        let splits = (heap.len() / 8).clamp(1, 16);
        let mut fresh = Vec::with_capacity(2 * splits);
        for _ in 0..splits {
            let Some(worst) = heap.pop() else { break };
            if worst.priority == 0.0 {
                heap.push(worst);
                break;
            }
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                // Interval can no longer be bisected in floating point.
                let mut frozen = worst;
                frozen.error = frozen.roundoff;
                fresh.push(frozen);
                continue;
            }
            fresh.push(kronrod(&mut f, worst.a, mid));
            fresh.push(kronrod(&mut f, mid, worst.b));
        }
        for s in fresh {
            heap.push(s);
        }
    }
}

/// Scalar convenience wrapper over [`integrate`].
pub fn integrate_scalar<F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| [f(x)], points, tol).map(|v| v[0])
}

/// Sort, clip to `[lo, hi]` and deduplicate a list of breakpoints, always
/// including both ends.
pub fn breakpoints(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = Vec::with_capacity(interior.len() + 2);
    pts.push(lo);
    pts.extend(interior.iter().copied().filter(|p| p.is_finite() && *p > lo && *p < hi));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
