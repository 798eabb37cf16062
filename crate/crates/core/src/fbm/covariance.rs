//! Cross-covariances of the Mandelbrot–Van Ness field.

use std::collections::HashMap;
use std::sync::RwLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::{check_hurst, kernel_gamma, mvn_difference, normalization_constant};
use crate::error::{Error, Result};
use crate::quad::{integrate_graded, integrate_power_tail, Estimate, QuadConfig};

/// Scale convention for the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Kernel constant `1/Γ(H+1/2)` as written; `Var B_1^H = c(H)^2`.
    Raw,
    /// Divide by `c(H)` so that `Var B_1^H = 1`.
    #[default]
    UnitVariance,
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Normalization::Raw => f.write_str("raw"),
            Normalization::UnitVariance => f.write_str("unit-variance"),
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "unit-variance" | "unit" => Ok(Normalization::UnitVariance),
            other => Err(crate::Error::config(format!(
                "unknown normalization `{other}`"
            ))),
        }
    }
}

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
const KEY_SCALE: f64 = 1e12;

fn key(x: f64) -> i64 {
    (x * KEY_SCALE).round() as i64
}

/// Raw `E B_u^H B_v^K` as the L² inner product of the two kernels.
pub fn raw_cross_covariance(u: f64, h: f64, v: f64, k: f64, cfg: &QuadConfig) -> Result<Estimate> {
    check_hurst(h)?;
    check_hurst(k)?;
    if u == 0.0 || v == 0.0 {
        return Ok(Estimate::ZERO);
    }
    let (a, b) = (h - 0.5, k - 0.5);
    let mut pts = vec![0.0, u, v];
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let p0 = pts[0];
    let span = pts[pts.len() - 1] - p0;

    // leading exponent of the integrand at a breakpoint `r`, approached from below
    let exponent_at = |r: f64| {
        let eu = (u == r || r == 0.0).then_some(a);
        let ev = (v == r || r == 0.0).then_some(b);
        match (eu, ev) {
            (Some(x), Some(y)) => Some(x.min(y).min(x + y)),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => None,
        }
    };
    // integrand with s = anchor + sign * z
    let product = |anchor: f64, sign: f64, z: f64| {
        let y = -anchor - sign * z;
        let fu = mvn_difference(a, u, (u - anchor) - sign * z, y);
        let fv = mvn_difference(b, v, (v - anchor) - sign * z, y);
        fu * fv
    };

    let parts = 2 * (pts.len() - 1) + 2;
    let part_cfg = QuadConfig {
        abs_tol: cfg.abs_tol * kernel_gamma(h) * kernel_gamma(k) / parts as f64,
        ..*cfg
    };
    let mut total = Estimate::ZERO;
    for w in pts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let half = 0.5 * (r - l);
        total = total + integrate_graded(|z| product(l, 1.0, z), half, None, &part_cfg)?;
        let alpha = exponent_at(r).map(|al| al.min(0.0));
        total = total + integrate_graded(|z| product(r, -1.0, z), half, alpha, &part_cfg)?;
    }
    if a != 0.0 && b != 0.0 {
        let alpha = exponent_at(p0).map(|al| al.min(0.0));
        let near = integrate_graded(|y| product(p0, -1.0, y), span, alpha, &part_cfg)?;
        let far = integrate_power_tail(|y| product(p0, -1.0, y), span, 2.0 - a - b, &part_cfg)?;
        total = total + near + far;
    }
    Ok(total.scale(1.0 / (kernel_gamma(h) * kernel_gamma(k))))
}

/// Quadrature model of the field covariance with a memo cache.
///
/// Population of the cache is internally synchronized, so a shared model can
/// be queried from several threads.
#[derive(Debug)]
pub struct CovarianceModel {
    cfg: QuadConfig,
    cache: RwLock<HashMap<[i64; 4], f64>>,
    norms: RwLock<HashMap<i64, f64>>,
}

impl Default for CovarianceModel {
    fn default() -> Self {
        Self::new(DEFAULT_TOLERANCE)
    }
}

impl Clone for CovarianceModel {
    fn clone(&self) -> Self {
        Self {
            cfg: self.cfg,
            cache: RwLock::new(self.cache.read().unwrap().clone()),
            norms: RwLock::new(self.norms.read().unwrap().clone()),
        }
    }
}

impl CovarianceModel {
    pub fn new(tolerance: f64) -> Self {
        Self {
            cfg: QuadConfig::with_abs_tol(tolerance),
            cache: RwLock::new(HashMap::new()),
            norms: RwLock::new(HashMap::new()),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.cfg.abs_tol
    }

    pub fn quad_config(&self) -> &QuadConfig {
        &self.cfg
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    /// `c(H)`, cached per rounded `H`.
    pub fn normalization_constant(&self, h: f64) -> Result<f64> {
        let k = key(h);
        if let Some(&c) = self.norms.read().unwrap().get(&k) {
            return Ok(c);
        }
        let c = normalization_constant(h, self.cfg.abs_tol * 1e-2)?;
        self.norms.write().unwrap().insert(k, c);
        Ok(c)
    }

    /// `E B_u^H B_v^K` in the requested normalization.
    pub fn cross_covariance(
        &self,
        u: f64,
        h: f64,
        v: f64,
        k: f64,
        mode: Normalization,
    ) -> Result<f64> {
        check_hurst(h)?;
        check_hurst(k)?;
        if u == 0.0 || v == 0.0 {
            return Ok(0.0);
        }
        // canonical argument order makes the cache exactly symmetric
        let (u, h, v, k) = if (key(u), key(h)) <= (key(v), key(k)) {
            (u, h, v, k)
        } else {
            (v, k, u, h)
        };
        let ck = [key(u), key(h), key(v), key(k)];
        let cached = self.cache.read().unwrap().get(&ck).copied();
        let raw = match cached {
            Some(x) => x,
            None => {
                let x = raw_cross_covariance(u, h, v, k, &self.cfg)?.value;
                // Cauchy–Schwarz: |E B_u^H B_v^K| <= c(H) c(K) |u|^H |v|^K
                let bound = self.normalization_constant(h)?
                    * self.normalization_constant(k)?
                    * u.abs().powf(h)
                    * v.abs().powf(k);
                if !(x.abs() <= bound * (1.0 + 1e-6) + 10.0 * self.cfg.abs_tol) {
                    return Err(Error::numerical(
                        format!("cross-covariance at (u={u}, H={h}, v={v}, K={k}) lost precision: {x:e} exceeds the Cauchy–Schwarz bound {bound:e}"),
                        (x.abs() - bound).abs(),
                    ));
                }
                self.cache.write().unwrap().insert(ck, x);
                x
            }
        };
        match mode {
            Normalization::Raw => Ok(raw),
            Normalization::UnitVariance => {
                Ok(raw / (self.normalization_constant(h)? * self.normalization_constant(k)?))
            }
        }
    }

    /// `E (B_t^H - B_{t2}^{H2})^2`.
    pub fn increment_second_moment(
        &self,
        t: f64,
        h: f64,
        t2: f64,
        h2: f64,
        mode: Normalization,
    ) -> Result<f64> {
        let aa = self.cross_covariance(t, h, t, h, mode)?;
        let bb = self.cross_covariance(t2, h2, t2, h2, mode)?;
        let ab = self.cross_covariance(t, h, t2, h2, mode)?;
        Ok((aa + bb - 2.0 * ab).max(0.0))
    }

    /// Second moment of the rectangular increment
    /// `B_t^H - B_{t2}^H - B_t^{H2} + B_{t2}^{H2}`.
    pub fn rectangular_increment_second_moment(
        &self,
        t: f64,
        t2: f64,
        h: f64,
        h2: f64,
        mode: Normalization,
    ) -> Result<f64> {
        if t == t2 || h == h2 {
            return Ok(0.0);
        }
        let pts = [(t, h, 1.0), (t2, h, -1.0), (t, h2, -1.0), (t2, h2, 1.0)];
        let mut acc = 0.0;
        for &(ti, hi, si) in &pts {
            for &(tj, hj, sj) in &pts {
                acc += si * sj * self.cross_covariance(ti, hi, tj, hj, mode)?;
            }
        }
        Ok(acc.max(0.0))
    }

    /// Covariance matrix of `(B_{t_i}^{H_i})_i` for a list of `(t, H)` points.
    pub fn covariance_matrix(
        &self,
        points: &[(f64, f64)],
        mode: Normalization,
    ) -> Result<DMatrix<f64>> {
        let n = points.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let c = self.cross_covariance(
                    points[i].0,
                    points[i].1,
                    points[j].0,
                    points[j].1,
                    mode,
                )?;
                m[(i, j)] = c;
                m[(j, i)] = c;
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn brownian_reduction() {
        let m = CovarianceModel::default();
        let c = m
            .cross_covariance(2.0, 0.5, 3.0, 0.5, Normalization::UnitVariance)
            .unwrap();
        assert_abs_diff_eq!(c, 2.0, epsilon = 1e-10);
        let c = m
            .cross_covariance(-2.0, 0.5, -3.0, 0.5, Normalization::Raw)
            .unwrap();
        assert_abs_diff_eq!(c, 2.0, epsilon = 1e-10);
        let c = m
            .cross_covariance(-2.0, 0.5, 3.0, 0.5, Normalization::Raw)
            .unwrap();
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_time_vanishes() {
        let m = CovarianceModel::default();
        assert_eq!(
            m.cross_covariance(0.0, 0.4, 5.0, 0.6, Normalization::Raw)
                .unwrap(),
            0.0
        );
        assert_eq!(
            m.increment_second_moment(0.0, 0.3, 0.0, 0.9, Normalization::Raw)
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn cross_hurst_correlation_matches_reference() {
        // high-precision reference values
        let m = CovarianceModel::default();
        let c = m
            .cross_covariance(1.0, 0.3, 1.0, 0.7, Normalization::UnitVariance)
            .unwrap();
        assert_abs_diff_eq!(c, 0.689_535_612_990_776_3, epsilon = 1e-7);
        let c = m
            .cross_covariance(1.0, 0.4, 1.0, 0.6, Normalization::UnitVariance)
            .unwrap();
        assert_abs_diff_eq!(c, 0.916_281_375_572_484_6, epsilon = 1e-7);
        let c = m
            .cross_covariance(-1.0, 0.3, 2.0, 0.7, Normalization::UnitVariance)
            .unwrap();
        assert_abs_diff_eq!(c, -0.304_506_942_985_570_9, epsilon = 1e-7);
    }

    #[test]
    fn stationary_increment_identity() {
        let m = CovarianceModel::default();
        for &h in &[0.2, 0.7, 0.9] {
            let v = m
                .increment_second_moment(1.0, h, 0.5, h, Normalization::UnitVariance)
                .unwrap();
            assert_abs_diff_eq!(v, 0.5f64.powf(2.0 * h), epsilon = 5e-8);
        }
    }

    #[test]
    fn cache_is_symmetric() {
        let m = CovarianceModel::default();
        let a = m
            .cross_covariance(1.3, 0.35, 2.1, 0.8, Normalization::Raw)
            .unwrap();
        let b = m
            .cross_covariance(2.1, 0.8, 1.3, 0.35, Normalization::Raw)
            .unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(m.cache_len(), 1);
    }

    #[test]
    fn rectangular_degenerate_cases() {
        let m = CovarianceModel::default();
        let mode = Normalization::UnitVariance;
        assert_eq!(
            m.rectangular_increment_second_moment(1.0, 2.0, 0.4, 0.4, mode)
                .unwrap(),
            0.0
        );
        assert_eq!(
            m.rectangular_increment_second_moment(1.0, 1.0, 0.4, 0.6, mode)
                .unwrap(),
            0.0
        );
        let r = m
            .rectangular_increment_second_moment(0.0, 1.0, 0.4, 0.6, mode)
            .unwrap();
        let s = m.increment_second_moment(1.0, 0.4, 1.0, 0.6, mode).unwrap();
        assert_abs_diff_eq!(r, s, epsilon = 1e-9);
    }
}
