//! Mandelbrot–Van Ness kernels and the normalization constant.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{integrate_graded, integrate_power_tail, QuadConfig};

/// Compact range of Hurst indices `0 < h_min <= h_max < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstRange {
    h_min: f64,
    h_max: f64,
}

impl HurstRange {
    pub fn new(h_min: f64, h_max: f64) -> Result<Self> {
        if !(h_min > 0.0 && h_min <= h_max && h_max < 1.0) {
            return Err(Error::domain(format!(
                "Hurst range needs 0 < h_min <= h_max < 1, got [{h_min}, {h_max}]"
            )));
        }
        Ok(Self { h_min, h_max })
    }

    /// Smallest range containing every value of `grid`.
    pub fn spanning(grid: &[f64]) -> Result<Self> {
        let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(lo, hi)
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn contains(&self, h: f64) -> bool {
        h >= self.h_min && h <= self.h_max
    }
}

pub(crate) fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Hurst index must lie in (0,1), got {h}"
        )))
    }
}

/// `Γ(H + 1/2)`.
pub fn kernel_gamma(h: f64) -> f64 {
    gamma(h + 0.5)
}

/// `K1(t, s) = ((t+s)^{H-1/2} - s^{H-1/2}) / Γ(H+1/2)` for a positive distance `s`.
pub fn kernel_k1(h: f64, t: f64, s: f64) -> Result<f64> {
    check_hurst(h)?;
    if t < 0.0 {
        return Err(Error::domain(format!("K1 needs t >= 0, got {t}")));
    }
    if s <= 0.0 {
        return Err(Error::domain(format!(
            "K1 needs s > 0, got {s}; the s = 0 endpoint must be integrated, not evaluated"
        )));
    }
    let a = h - 0.5;
    Ok(s.powf(a) * (a * (t / s).ln_1p()).exp_m1() / kernel_gamma(h))
}

/// `K2(t, s) = (t-s)^{H-1/2} / Γ(H+1/2)` for `0 <= s < t`.
pub fn kernel_k2(h: f64, t: f64, s: f64) -> Result<f64> {
    check_hurst(h)?;
    if s < 0.0 || s >= t {
        return Err(Error::domain(format!(
            "K2 needs 0 <= s < t, got s = {s}, t = {t}"
        )));
    }
    Ok((t - s).powf(h - 0.5) / kernel_gamma(h))
}

/// Unnormalized Mandelbrot–Van Ness integrand `(t-s)_+^a - (-s)_+^a` given the
/// two bases `x = t - s` and `y = -s` (so that `x - y = t`).
#[inline]
pub(crate) fn mvn_difference(a: f64, t: f64, x: f64, y: f64) -> f64 {
    if x > 0.0 && y > 0.0 {
        if t >= 0.0 {
            y.powf(a) * (a * (t / y).ln_1p()).exp_m1()
        } else {
            -(x.powf(a) * (a * (-t / x).ln_1p()).exp_m1())
        }
    } else if x > 0.0 {
        x.powf(a)
    } else if y > 0.0 {
        -y.powf(a)
    } else {
        0.0
    }
}

/// `c(H) = sqrt(Var B_1^H)` for the raw Mandelbrot–Van Ness normalization,
/// computed by adaptive quadrature to absolute tolerance `tol`.
pub fn normalization_constant(h: f64, tol: f64) -> Result<f64> {
    check_hurst(h)?;
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let a = h - 0.5;
    if a == 0.0 {
        return Ok(1.0);
    }
    let g = kernel_gamma(h);
    let cfg = QuadConfig::with_abs_tol(0.5 * tol * g * g);
    let integrand = |s: f64| {
        let d = s.powf(a) * (a * s.recip().ln_1p()).exp_m1();
        d * d
    };
    let alpha = if a < 0.0 { 2.0 * a } else { a };
    let near = integrate_graded(integrand, 1.0, Some(alpha), &cfg)?;
    let far = integrate_power_tail(integrand, 1.0, 2.0 - 2.0 * a, &cfg)?;
    let var = (near.value + far.value + 0.5 / h) / (g * g);
    Ok(var.sqrt())
}
