//! Stationary fractional Ornstein–Uhlenbeck processes
//! `Ū_t^H = ∫_{-∞}^t e^{-(t-s)} dB_s^H` driven by the shared field.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::covariance::raw_cross_covariance;
use crate::fbm::field::check_ascending;
use crate::fbm::{
    CovarianceModel, FbmField, HurstRange, NoiseConfig, NoiseLayout, Normalization,
    ProjectionSampler,
};
use crate::quad::{integrate_with_kinks, QuadConfig};

/// Weight cut-off for the exponential memory of the process.
pub const DEFAULT_FOU_TOLERANCE: f64 = 1e-10;

/// Negative extension `L` needed so that `e^{-L}` falls below `tol`.
pub fn required_extension(tol: f64) -> f64 {
    (1.0 / tol).ln()
}

/// Starting condition of a sampled path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FouInit {
    /// Run the recursion from `-L` so that the path is (approximately) stationary at `t = 0`.
    Stationary,
    /// Start every Hurst index from this point of `ℝ^d` at `t = 0`.
    Given(Vec<f64>),
}

/// Sampled fOU values indexed by (time, Hurst, component), times `>= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FouPath {
    pub t_grid: Vec<f64>,
    pub h_grid: Vec<f64>,
    pub dim: usize,
    values: Vec<f64>,
    pub init: FouInit,
    pub seed: u64,
    /// Length of the negative time extension used by the recursion.
    pub truncation: f64,
}

impl FouPath {
    #[inline]
    fn idx(&self, ti: usize, hi: usize, c: usize) -> usize {
        (ti * self.h_grid.len() + hi) * self.dim + c
    }

    #[inline]
    pub fn get(&self, ti: usize, hi: usize, c: usize) -> f64 {
        self.values[self.idx(ti, hi, c)]
    }

    pub fn path(&self, hi: usize, c: usize) -> Vec<f64> {
        (0..self.t_grid.len())
            .map(|ti| self.get(ti, hi, c))
            .collect()
    }

    pub fn point(&self, ti: usize, hi: usize) -> &[f64] {
        let i = self.idx(ti, hi, 0);
        &self.values[i..i + self.dim]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,H,component,value")?;
        for (ti, t) in self.t_grid.iter().enumerate() {
            for (hi, h) in self.h_grid.iter().enumerate() {
                for c in 0..self.dim {
                    writeln!(w, "{},{},{},{}", t, h, c, self.get(ti, hi, c))?;
                }
            }
        }
        Ok(())
    }
}

fn uniform_step(grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::config("fOU sampling needs at least two field times"));
    }
    let step = grid[1] - grid[0];
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step {
            return Err(Error::config(
                "fOU sampling needs a uniform field time grid",
            ));
        }
    }
    Ok(step)
}

/// Riemann–Stieltjes recursion `U_{i+1} = e^{-Δ} U_i + e^{-Δ/2} (B_{i+1} - B_i)`
/// over the field's uniform time grid, for every Hurst index of the field.
pub fn sample_fou(field: &FbmField, init: &FouInit, tol: f64) -> Result<FouPath> {
    let grid = field.t_grid();
    let step = uniform_step(grid)?;
    let origin = field
        .t_index(0.0)
        .ok_or_else(|| Error::config("field time grid must contain t = 0"))?;
    let d = field.dim();
    let start = match init {
        FouInit::Stationary => {
            let need = required_extension(tol);
            let have = -grid[0];
            if have < need - 1e-9 {
                return Err(Error::config(format!(
                    "insufficient negative extension: field starts at {}, stationary start needs L >= {need:.4}",
                    grid[0]
                )));
            }
            0
        }
        FouInit::Given(x) => {
            if x.len() != d {
                return Err(Error::config(format!(
                    "initial point has dimension {}, field has {d}",
                    x.len()
                )));
            }
            origin
        }
    };
    let decay = (-step).exp();
    let half = (-0.5 * step).exp();
    let nh = field.h_grid().len();
    let out_times: Vec<f64> = grid[origin..].to_vec();
    let mut values = vec![0.0; out_times.len() * nh * d];
    for hi in 0..nh {
        for c in 0..d {
            let mut u = match init {
                FouInit::Stationary => 0.0,
                FouInit::Given(x) => x[c],
            };
            if start == origin {
                values[hi * d + c] = u;
            }
            for i in start..grid.len() - 1 {
                u = decay * u + half * (field.get(i + 1, hi, c) - field.get(i, hi, c));
                if i + 1 >= origin {
                    values[((i + 1 - origin) * nh + hi) * d + c] = u;
                }
            }
        }
    }
    Ok(FouPath {
        t_grid: out_times,
        h_grid: field.h_grid().to_vec(),
        dim: d,
        values,
        init: init.clone(),
        seed: field.seed(),
        truncation: -grid[0],
    })
}

/// Projection sampler over `[-L, T]` with `L` sized for stationary starts.
#[derive(Debug)]
pub struct FouSampler {
    sampler: ProjectionSampler,
    tol: f64,
    extension: f64,
}

impl FouSampler {
    pub fn new(
        step: f64,
        horizon: f64,
        h_grid: &[f64],
        dim: usize,
        tol: f64,
        mode: Normalization,
        model: &CovarianceModel,
    ) -> Result<Self> {
        check_ascending("h_grid", h_grid)?;
        let n_neg = (required_extension(tol) / step).ceil() as usize;
        let n_pos = (horizon / step).round() as usize;
        if ((n_pos as f64) * step - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return Err(Error::config(format!(
                "horizon {horizon} is not a multiple of the step {step}"
            )));
        }
        let extension = n_neg as f64 * step;
        let t_grid: Vec<f64> = (0..=n_neg + n_pos)
            .map(|i| (i as f64 - n_neg as f64) * step)
            .collect();
        let cfg = NoiseConfig::new(step, horizon)
            .with_t_min(-extension)
            .with_dim(dim);
        let layout = Arc::new(NoiseLayout::new(cfg, HurstRange::spanning(h_grid)?)?);
        let sampler = ProjectionSampler::new(layout, &t_grid, h_grid, mode, model)?;
        Ok(Self {
            sampler,
            tol,
            extension,
        })
    }

    pub fn extension(&self) -> f64 {
        self.extension
    }

    pub fn field_sampler(&self) -> &ProjectionSampler {
        &self.sampler
    }

    pub fn sample(&self, seed: u64) -> FouPath {
        let field = self.sampler.sample(seed);
        sample_fou(&field, &FouInit::Stationary, self.tol)
            .expect("grid built with sufficient extension")
    }
}

/// `E Ū_{t1}^H Ū_{t2}^K` (per component) by nested quadrature of the field
/// covariance over `Ū_t = ∫_0^∞ e^{-x} (B_t - B_{t-x}) dx`, with the
/// exponential weights cut where they fall below `tol`.
pub fn fou_covariance(
    t1: f64,
    h: f64,
    t2: f64,
    k: f64,
    tol: f64,
    model: &CovarianceModel,
    mode: Normalization,
) -> Result<f64> {
    let qc = QuadConfig {
        abs_tol: model.tolerance(),
        rel_tol: 1e-10,
        max_subdivisions: 2000,
    };
    let gcfg = QuadConfig {
        abs_tol: 0.1 * model.tolerance(),
        ..QuadConfig::default()
    };
    let g = |u: f64, v: f64| -> Result<f64> { Ok(raw_cross_covariance(u, h, v, k, &gcfg)?.value) };
    let cut = required_extension(tol) + 10.0;
    let alpha = h + k;
    let mut err: Option<Error> = None;
    // ∫_0^Y e^{-y} G(u, t2 - y) dy
    let mut inner = |u: f64| -> f64 {
        let y_max = cut + t2.abs() + (t2 - u).abs();
        let res = integrate_with_kinks(
            |y: f64| {
                (-y).exp()
                    * g(u, t2 - y).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        0.0
                    })
            },
            0.0,
            y_max,
            &[0.0, t2, t2 - u],
            alpha,
            &qc,
        );
        match res {
            Ok(e) => e.value,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        }
    };
    let a_const = inner(t1);
    let g12 = g(t1, t2)?;
    let x_max = cut + t1.abs() + (t1 - t2).abs();
    let outer = integrate_with_kinks(
        |x: f64| {
            let u = t1 - x;
            let gx = g(u, t2).unwrap_or(0.0);
            (-x).exp() * (g12 - gx - a_const + inner(u))
        },
        0.0,
        x_max,
        &[0.0, t1, t1 - t2],
        alpha,
        &qc,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    let scale = match mode {
        Normalization::Raw => 1.0,
        Normalization::UnitVariance => {
            1.0 / (model.normalization_constant(h)? * model.normalization_constant(k)?)
        }
    };
    Ok(outer.value * scale)
}

/// `r_{H,K}(s) = E Ū_0^H Ū_s^K`; negative lags use `r_{H,K}(-s) = r_{K,H}(s)`.
pub fn stationary_cross_covariance(
    h: f64,
    k: f64,
    s: f64,
    tol: f64,
    model: &CovarianceModel,
    mode: Normalization,
) -> Result<f64> {
    if s < 0.0 {
        return fou_covariance(0.0, k, -s, h, tol, model, mode);
    }
    fou_covariance(0.0, h, s, k, tol, model, mode)
}

/// `E|Ū_0^H - Ū_0^K|²`, the centering constant of the ergodic mean series.
pub fn stationary_sq_diff(
    h: f64,
    k: f64,
    tol: f64,
    model: &CovarianceModel,
    mode: Normalization,
) -> Result<f64> {
    if h == k {
        return Ok(0.0);
    }
    let hh = stationary_cross_covariance(h, h, 0.0, tol, model, mode)?;
    let kk = stationary_cross_covariance(k, k, 0.0, tol, model, mode)?;
    let hk = stationary_cross_covariance(h, k, 0.0, tol, model, mode)?;
    Ok(hh + kk - 2.0 * hk)
}

/// Lazily evaluated `s ↦ r_{H,K}(s)` with memoized lag values.
#[derive(Debug)]
pub struct StationaryCovariance {
    pub h: f64,
    pub k: f64,
    pub h_max: f64,
    tol: f64,
    mode: Normalization,
    model: CovarianceModel,
    cache: RwLock<BTreeMap<i64, f64>>,
}

impl StationaryCovariance {
    pub fn new(h: f64, k: f64, tol: f64, mode: Normalization, model: &CovarianceModel) -> Self {
        Self {
            h,
            k,
            h_max: h.max(k),
            tol,
            mode,
            model: model.clone(),
            cache: RwLock::new(BTreeMap::new()),
        }
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        let key = (s * 1e12).round() as i64;
        if let Some(&v) = self.cache.read().unwrap().get(&key) {
            return Ok(v);
        }
        let v = stationary_cross_covariance(self.h, self.k, s, self.tol, &self.model, self.mode)?;
        self.cache.write().unwrap().insert(key, v);
        Ok(v)
    }

    /// `E(Ū_0^H Ū_s^K + Ū_s^H Ū_0^K) = r_{H,K}(s) + r_{H,K}(-s)`.
    pub fn symmetrized(&self, s: f64) -> Result<f64> {
        Ok(self.value(s)? + self.value(-s)?)
    }

    pub fn cached_lags(&self) -> Vec<(f64, f64)> {
        self.cache
            .read()
            .unwrap()
            .iter()
            .map(|(&k, &v)| (k as f64 * 1e-12, v))
            .collect()
    }
}

/// Row of a decay profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub s: f64,
    /// `|r_sym(s)|`.
    pub r: f64,
    /// `1 ∧ s^{2 h_max - 2}`.
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub h: f64,
    pub k: f64,
    pub h_max: f64,
    pub rows: Vec<DecayRow>,
    /// Largest ratio over lags `s <= 1` (first lag if none).
    pub calibrated_constant: f64,
}

impl DecayProfile {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s,r,envelope")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.s, r.r, r.envelope)?;
        }
        Ok(())
    }
}

pub fn decay_envelope(s: f64, h_max: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else {
        s.powf(2.0 * h_max - 2.0)
    }
}

/// `|r_sym(s)|` next to the envelope `1 ∧ s^{2 h_max - 2}` over `s_grid`.
/// `h_max` defaults to `max(H, K)`. Lags are evaluated in parallel.
pub fn covariance_decay_profile(
    h: f64,
    k: f64,
    s_grid: &[f64],
    h_max: Option<f64>,
    tol: f64,
    model: &CovarianceModel,
) -> Result<DecayProfile> {
    check_ascending("s_grid", s_grid)?;
    if s_grid[0] < 0.0 {
        return Err(Error::config("lags must be non-negative"));
    }
    let h_max = h_max.unwrap_or(h.max(k));
    let mode = Normalization::UnitVariance;
    let values: Vec<Result<f64>> = s_grid
        .par_iter()
        .map(|&s| {
            let a = stationary_cross_covariance(h, k, s, tol, model, mode)?;
            let b = stationary_cross_covariance(k, h, s, tol, model, mode)?;
            Ok(a + b)
        })
        .collect();
    let mut rows = Vec::with_capacity(s_grid.len());
    for (&s, v) in s_grid.iter().zip(values) {
        let r = v?.abs();
        let envelope = decay_envelope(s, h_max);
        rows.push(DecayRow {
            s,
            r,
            envelope,
            ratio: r / envelope,
        });
    }
    let calibrated_constant = rows
        .iter()
        .filter(|r| r.s <= 1.0)
        .map(|r| r.ratio)
        .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))
        .unwrap_or(rows[0].ratio);
    Ok(DecayProfile {
        h,
        k,
        h_max,
        rows,
        calibrated_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_case_is_classical_ou() {
        let model = CovarianceModel::default();
        let mode = Normalization::UnitVariance;
        let v0 = stationary_cross_covariance(0.5, 0.5, 0.0, DEFAULT_FOU_TOLERANCE, &model, mode)
            .unwrap();
        assert!((v0 - 0.5).abs() < 1e-7, "{v0}");
        let v1 = stationary_cross_covariance(0.5, 0.5, 1.0, DEFAULT_FOU_TOLERANCE, &model, mode)
            .unwrap();
        assert!((v1 - 0.5 * (-1.0f64).exp()).abs() < 1e-7, "{v1}");
    }

    #[test]
    fn envelope_branches() {
        assert_eq!(decay_envelope(0.0, 0.8), 1.0);
        assert_eq!(decay_envelope(1.0, 0.8), 1.0);
        assert!((decay_envelope(4.0, 0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn given_start_recursion() {
        let field = FbmField::from_fn(
            vec![0.0, 0.5, 1.0],
            vec![0.5],
            1,
            Normalization::Raw,
            |_, _, _| 0.0,
        );
        let p = sample_fou(&field, &FouInit::Given(vec![2.0]), DEFAULT_FOU_TOLERANCE).unwrap();
        assert_eq!(p.get(0, 0, 0), 2.0);
        assert!((p.get(2, 0, 0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn short_extension_is_rejected() {
        let grid: Vec<f64> = (-10..=10).map(|i| i as f64).collect();
        let field = FbmField::from_fn(grid, vec![0.5], 1, Normalization::Raw, |_, _, _| 0.0);
        let err = sample_fou(&field, &FouInit::Stationary, 1e-10).unwrap_err();
        assert!(err.to_string().contains("23.02"), "{err}");
    }
}
