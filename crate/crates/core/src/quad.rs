//! Adaptive Gauss–Kronrod quadrature with graded substitutions for
//! integrable endpoint singularities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Result of a quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };

    pub fn scale(self, c: f64) -> Estimate {
        Estimate {
            value: self.value * c,
            error: self.error * c.abs(),
            evaluations: self.evaluations,
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;

    fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-12,
            max_subdivisions: 400,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// One 21-point Kronrod rule with its embedded 10-point Gauss estimate.
fn qk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jj = 2 * j + 1;
        let x = half * XGK[jj];
        let (f1, f2) = (f(center - x), f(center + x));
        fv1[jj] = f1;
        fv2[jj] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jj] * (f1 + f2);
        res_abs += WGK[jj] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jj = 2 * j;
        let x = half * XGK[jj];
        let (f1, f2) = (f(center - x), f(center + x));
        fv1[jj] = f1;
        fv2[jj] = f2;
        res_k += WGK[jj] * (f1 + f2);
        res_abs += WGK[jj] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let h = half.abs();
    (res_k * half, rescale_error(err, res_abs * h, res_asc * h))
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (21 point) integration of `f` over `[a, b]`.
///
/// The segment with the largest error estimate is bisected until the total
/// error falls below `max(abs_tol, rel_tol * |value|)`. Running out of
/// subdivisions is an error that carries the achieved error estimate.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::ZERO);
    }
    let (value, error) = qk21(&mut f, a, b);
    let mut evaluations = 21;
    let mut total_v = value;
    let mut total_e = error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut pieces = 1;
    loop {
        if !total_v.is_finite() || !total_e.is_finite() {
            return Err(Error::numerical("non-finite integrand", f64::INFINITY));
        }
        if total_e <= cfg.abs_tol.max(cfg.rel_tol * total_v.abs()) {
            break;
        }
        if pieces >= cfg.max_subdivisions {
            return Err(Error::numerical(
                format!("quadrature did not converge on [{a}, {b}] within {pieces} subdivisions"),
                total_e,
            ));
        }
        let seg = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            // interval exhausted at machine resolution
            heap.push(seg);
            if total_e <= 1e3 * cfg.abs_tol.max(cfg.rel_tol * total_v.abs()) {
                break;
            }
            return Err(Error::numerical("quadrature hit roundoff limit", total_e));
        }
        let (v1, e1) = qk21(&mut f, seg.a, mid);
        let (v2, e2) = qk21(&mut f, mid, seg.b);
        evaluations += 42;
        total_v += v1 + v2 - seg.value;
        total_e += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
        pieces += 1;
    }
    // resum to shed accumulated drift in the running totals
    let (mut v, mut e) = (0.0, 0.0);
    for s in heap.iter() {
        v += s.value;
        e += s.error;
    }
    Ok(Estimate {
        value: v,
        error: e,
        evaluations,
    })
}

/// Grading power that turns an endpoint behaviour `z^alpha` into a
/// polynomially smooth integrand under `z = L w^k`.
pub fn grading_power(alpha: f64) -> f64 {
    if alpha < 0.0 {
        3.0 / (1.0 + alpha)
    } else {
        3.0
    }
}

/// Integrate `g(z)` over `z ∈ [0, len]` where `g` may behave like `z^alpha`
/// at `z = 0`. Uses `z = len · w^k` with `k` from [`grading_power`].
///
/// `g` receives the distance `z` itself so callers can form differences
/// against the anchor without cancellation.
pub fn integrate_graded<F: FnMut(f64) -> f64>(
    mut g: F,
    len: f64,
    alpha: Option<f64>,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    if len <= 0.0 {
        return Ok(Estimate::ZERO);
    }
    match alpha {
        None => integrate(g, 0.0, len, cfg),
        Some(al) => {
            let k = grading_power(al);
            integrate(
                |w: f64| {
                    if w <= 0.0 {
                        return 0.0;
                    }
                    let wk1 = w.powf(k - 1.0);
                    let z = len * wk1 * w;
                    g(z) * len * k * wk1
                },
                0.0,
                1.0,
                cfg,
            )
        }
    }
}

/// Integrate `g(y)` over `y ∈ [start, ∞)` for an integrand decaying like
/// `y^{-beta}` with `beta > 1`, via `y = start · w^{-q}`, `q = 2/(beta-1)`.
pub fn integrate_power_tail<F: FnMut(f64) -> f64>(
    mut g: F,
    start: f64,
    beta: f64,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    if start <= 0.0 || beta <= 1.0 {
        return Err(Error::domain(
            "power tail needs start > 0 and decay exponent > 1",
        ));
    }
    let q = 2.0 / (beta - 1.0);
    integrate(
        |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let wq = w.powf(-q);
            let y = start * wq;
            g(y) * start * q * wq / w
        },
        0.0,
        1.0,
        cfg,
    )
}

/// Integrate a function on `[a, b]` that is smooth except at the listed
/// interior kink points, where it may behave like `|s - kink|^alpha`.
///
/// Each sub-interval is split at its midpoint and both halves are graded
/// toward their endpoint.
pub fn integrate_with_kinks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    kinks: &[f64],
    alpha: f64,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    if b <= a {
        return Ok(Estimate::ZERO);
    }
    let mut pts = vec![a];
    let mut inner: Vec<f64> = kinks.iter().copied().filter(|&k| k > a && k < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    let mut total = Estimate::ZERO;
    let n = pts.len() - 1;
    let piece_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / (2 * n) as f64,
        ..*cfg
    };
    for i in 0..n {
        let (l, r) = (pts[i], pts[i + 1]);
        let half = 0.5 * (r - l);
        let left_kink = i > 0 || kinks.contains(&l);
        let right_kink = i + 1 < n || kinks.contains(&r);
        let al = if left_kink { Some(alpha) } else { None };
        let ar = if right_kink { Some(alpha) } else { None };
        total = total + integrate_graded(|z| f(l + z), half, al, &piece_cfg)?;
        total = total + integrate_graded(|z| f(r - z), half, ar, &piece_cfg)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((e.value - 0.0).abs() < 1e-14);
    }

    #[test]
    fn singular_endpoint_via_grading() {
        // ∫_0^1 z^{-0.8} dz = 5
        let cfg = QuadConfig::with_abs_tol(1e-12);
        let e = integrate_graded(|z| z.powf(-0.8), 1.0, Some(-0.8), &cfg).unwrap();
        assert!((e.value - 5.0).abs() < 1e-10, "{}", e.value);
    }

    #[test]
    fn power_tail() {
        // ∫_1^∞ y^{-1.5} dy = 2
        let cfg = QuadConfig::with_abs_tol(1e-12);
        let e = integrate_power_tail(|y| y.powf(-1.5), 1.0, 1.5, &cfg).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10, "{}", e.value);
    }

    #[test]
    fn kinked_integrand() {
        // ∫_{-1}^{2} |s|^{0.3} ds = (1 + 2^{1.3}) / 1.3
        let cfg = QuadConfig::with_abs_tol(1e-12);
        let e =
            integrate_with_kinks(|s: f64| s.abs().powf(0.3), -1.0, 2.0, &[0.0], 0.3, &cfg).unwrap();
        let exact = (1.0 + 2f64.powf(1.3)) / 1.3;
        assert!((e.value - exact).abs() < 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_error() {
        let cfg = QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_subdivisions: 3,
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-3, 1.0, &cfg).unwrap_err();
        match err {
            Error::Numerical { achieved, .. } => assert!(achieved > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
