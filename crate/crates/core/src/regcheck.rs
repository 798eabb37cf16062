//! Quadrature and Monte Carlo checks of the regularity and moment bounds of
//! the field, the SDE solutions and their ergodic means.
//!
//! Every check returns a [`BoundCheckReport`] whose verdict is a pure function
//! of the stored ratios, standard errors and declared [`VerdictRule`].

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::field::check_ascending;
use crate::fbm::{
    CovarianceModel, ExactSampler, FbmField, HurstRange, NoiseConfig, NoiseLayout, Normalization,
    ProjectionSampler,
};
use crate::fou::{covariance_decay_profile, stationary_sq_diff, FouSampler, DEFAULT_FOU_TOLERANCE};
use crate::rng::derive_seed;
use crate::sde::{ergodic_mean_sq_diff, euler_scheme, solve_reference, DriftSpec, ErgodicMode};

/// Smallest Monte Carlo sample accepted by the moment checks.
pub const MIN_PATHS: usize = 1000;
/// Standard-error margin used by every Monte Carlo verdict.
pub const SE_MARGIN: f64 = 3.0;
/// Number of seed batches behind regression-slope standard errors.
const SLOPE_BATCHES: usize = 10;

/// Declared pass/fail rule of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum VerdictRule {
    /// `ratio_i - m·se_i <= factor · (ratio_ref + m·se_ref)` for every point.
    BoundedByReference {
        reference: usize,
        factor: f64,
        se_margin: f64,
    },
    /// `ratio_i - m·se_i <= threshold` for every point.
    AllAtMost { threshold: f64, se_margin: f64 },
    /// Ratios come in consecutive groups of `group`. A group passes when all
    /// of its ratios are `<= threshold`; at least `min_fraction` of the
    /// groups must pass.
    GroupFractionAtMost {
        group: usize,
        threshold: f64,
        min_fraction: f64,
    },
    /// Single ratio holding a regression slope: `slope - m·se <= threshold`.
    SlopeAtMost { threshold: f64, se_margin: f64 },
    /// Single ratio holding a regression slope: `|slope - target| - m·se <= half_width`.
    SlopeWithin {
        target: f64,
        half_width: f64,
        se_margin: f64,
    },
    /// The first `split` ratios are per-seed constants at horizon `T`, the
    /// rest at `2T`. The `quantile` must move by less than `max_drift`
    /// (relative).
    QuantileStability {
        split: usize,
        quantile: f64,
        max_drift: f64,
    },
    /// Ratios on a `(δ, t)` grid stored δ-major with `n_times` columns.
    /// Consecutive δ rows agree within `factor`, and from column `mixing` on
    /// every row is non-increasing in `t`, all up to `m` standard errors.
    StableUnderHalving {
        n_times: usize,
        factor: f64,
        mixing: usize,
        se_margin: f64,
    },
}

impl VerdictRule {
    pub fn evaluate(&self, ratios: &[f64], se: &[f64]) -> bool {
        if ratios.is_empty() || ratios.len() != se.len() || ratios.iter().any(|r| r.is_nan()) {
            return false;
        }
        match *self {
            VerdictRule::BoundedByReference {
                reference,
                factor,
                se_margin,
            } => {
                let Some(&r0) = ratios.get(reference) else {
                    return false;
                };
                let cap = factor * (r0 + se_margin * se[reference]);
                ratios.iter().zip(se).all(|(r, s)| r - se_margin * s <= cap)
            }
            VerdictRule::AllAtMost {
                threshold,
                se_margin,
            } => ratios
                .iter()
                .zip(se)
                .all(|(r, s)| r - se_margin * s <= threshold),
            VerdictRule::GroupFractionAtMost {
                group,
                threshold,
                min_fraction,
            } => {
                if group == 0 || !ratios.len().is_multiple_of(group) {
                    return false;
                }
                let groups = ratios.len() / group;
                let pass = ratios
                    .chunks(group)
                    .filter(|g| g.iter().all(|&r| r <= threshold))
                    .count();
                pass as f64 >= min_fraction * groups as f64
            }
            VerdictRule::SlopeAtMost {
                threshold,
                se_margin,
            } => ratios.len() == 1 && ratios[0] - se_margin * se[0] <= threshold,
            VerdictRule::SlopeWithin {
                target,
                half_width,
                se_margin,
            } => ratios.len() == 1 && (ratios[0] - target).abs() - se_margin * se[0] <= half_width,
            VerdictRule::QuantileStability {
                split,
                quantile: q,
                max_drift,
            } => {
                if split == 0 || split >= ratios.len() {
                    return false;
                }
                let a = quantile(&ratios[..split], q);
                let b = quantile(&ratios[split..], q);
                if a == 0.0 {
                    return b == 0.0;
                }
                ((b - a) / a).abs() < max_drift
            }
            VerdictRule::StableUnderHalving {
                n_times,
                factor,
                mixing,
                se_margin,
            } => {
                if n_times == 0 || !ratios.len().is_multiple_of(n_times) {
                    return false;
                }
                let rows = ratios.len() / n_times;
                let at =
                    |d: usize, t: usize| (ratios[d * n_times + t], se_margin * se[d * n_times + t]);
                for d in 0..rows {
                    for t in mixing.max(1)..n_times {
                        let (prev, ep) = at(d, t - 1);
                        let (cur, ec) = at(d, t);
                        if t > mixing && cur - ec > prev + ep {
                            return false;
                        }
                    }
                }
                for d in 1..rows {
                    for t in 0..n_times {
                        let (a, ea) = at(d - 1, t);
                        let (b, eb) = at(d, t);
                        if b - eb > factor * (a + ea) || a - ea > factor * (b + eb) {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }
}

/// Self-contained evidence for one bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub check: String,
    /// The bound expression the statistic is divided by.
    pub bound: String,
    /// Names of the coordinates in `points`.
    pub columns: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub statistics: Vec<f64>,
    pub ratios: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub calibrated_constant: f64,
    pub rule: VerdictRule,
    pub verdict: bool,
    /// Extra scalar diagnostics (quantiles, tolerances, sample sizes).
    pub details: BTreeMap<String, f64>,
}

impl BoundCheckReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        check: &str,
        bound: &str,
        columns: &[&str],
        points: Vec<Vec<f64>>,
        statistics: Vec<f64>,
        ratios: Vec<f64>,
        standard_errors: Vec<f64>,
        calibrated_constant: f64,
        rule: VerdictRule,
    ) -> Self {
        let verdict = rule.evaluate(&ratios, &standard_errors);
        Self {
            check: check.to_string(),
            bound: bound.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            points,
            statistics,
            ratios,
            standard_errors,
            calibrated_constant,
            rule,
            verdict,
            details: BTreeMap::new(),
        }
    }

    /// Verdict re-derived from the stored ratios and rule.
    pub fn recompute_verdict(&self) -> bool {
        self.rule.evaluate(&self.ratios, &self.standard_errors)
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// Ratio table: point coordinates, statistic, ratio, standard error.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = self.columns.clone();
        header.extend(["statistic", "ratio", "se"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.ratios.len() {
            let mut row: Vec<String> = self.points[i].iter().map(|v| v.to_string()).collect();
            row.push(self.statistics[i].to_string());
            row.push(self.ratios[i].to_string());
            row.push(self.standard_errors[i].to_string());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Log-log least-squares fit of moments against lags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderRegression {
    pub lags: Vec<f64>,
    pub moments: Vec<f64>,
    pub moment_se: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// `log m - (intercept + slope · log ℓ)` per lag.
    pub residuals: Vec<f64>,
}

impl HolderRegression {
    /// Ordinary least squares on `(log ℓ, log m)`; the slope standard error is
    /// the classical residual-based one (0 with two lags).
    pub fn fit(lags: &[f64], moments: &[f64]) -> Result<Self> {
        if lags.len() != moments.len() || lags.len() < 2 {
            return Err(Error::validation(
                "regression needs at least two (lag, moment) pairs",
            ));
        }
        if lags
            .iter()
            .chain(moments)
            .any(|&v| !(v > 0.0) || !v.is_finite())
        {
            return Err(Error::validation(
                "lags and moments must be positive and finite",
            ));
        }
        let x: Vec<f64> = lags.iter().map(|l| l.ln()).collect();
        let y: Vec<f64> = moments.iter().map(|m| m.ln()).collect();
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        if sxx <= 1e-24 {
            return Err(Error::validation(
                "degenerate regression: log lags have zero variance",
            ));
        }
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residuals: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| b - intercept - slope * a)
            .collect();
        let slope_se = if x.len() > 2 {
            (residuals.iter().map(|r| r * r).sum::<f64>() / (n - 2.0) / sxx).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            lags: lags.to_vec(),
            moments: moments.to_vec(),
            moment_se: vec![0.0; lags.len()],
            slope,
            intercept,
            slope_se,
            residuals,
        })
    }
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Per-lag moments (rows: paths) to means, SEs and a regression whose slope
/// SE comes from refitting on seed batches.
fn regress_samples(lags: &[f64], samples: &[Vec<f64>]) -> Result<HolderRegression> {
    let nl = lags.len();
    let column = |rows: &[Vec<f64>], j: usize| -> Vec<f64> { rows.iter().map(|r| r[j]).collect() };
    let (mut means, mut ses) = (Vec::with_capacity(nl), Vec::with_capacity(nl));
    for j in 0..nl {
        let (m, s) = mean_se(&column(samples, j));
        means.push(m);
        ses.push(s);
    }
    let mut reg = HolderRegression::fit(lags, &means)?;
    reg.moment_se = ses;
    let size = samples.len() / SLOPE_BATCHES;
    if size >= 2 {
        let mut slopes = Vec::with_capacity(SLOPE_BATCHES);
        for b in samples.chunks_exact(size).take(SLOPE_BATCHES) {
            let m: Vec<f64> = (0..nl).map(|j| mean_se(&column(b, j)).0).collect();
            if let Ok(r) = HolderRegression::fit(lags, &m) {
                slopes.push(r.slope);
            }
        }
        if slopes.len() == SLOPE_BATCHES {
            reg.slope_se = mean_se(&slopes).1;
        }
    }
    Ok(reg)
}

fn check_paths(paths: usize) -> Result<()> {
    if paths < MIN_PATHS {
        return Err(Error::config(format!(
            "need at least {MIN_PATHS} paths, got {paths}"
        )));
    }
    Ok(())
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    v
}

fn index_of(grid: &[f64], x: f64) -> usize {
    grid.iter()
        .position(|&g| (g - x).abs() <= 1e-12 * x.abs().max(1.0))
        .expect("value inserted into grid")
}

/// Index whose coordinate is closest to 1 (in log scale) among `usable` points.
fn reference_index(xs: &[f64], usable: impl Fn(usize) -> bool) -> usize {
    let mut best = None;
    for (i, &x) in xs.iter().enumerate() {
        if !usable(i) || x <= 0.0 {
            continue;
        }
        let d = x.ln().abs();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// Slope of `log E(B_{t+ℓ}^H - B_t^H)²` against `log ℓ`, pooling the
/// increments from `t = 0` and `t = 1` of exact-sampler draws.
pub fn holder_time_exponent(
    h: f64,
    lags: &[f64],
    paths: usize,
    seed: u64,
    mode: Normalization,
    model: &CovarianceModel,
) -> Result<HolderRegression> {
    check_paths(paths)?;
    check_ascending("lags", lags)?;
    if lags.len() < 4 || lags[0] <= 0.0 || lags[lags.len() - 1] / lags[0] < 10.0 - 1e-9 {
        return Err(Error::config(
            "need at least 4 positive lags spanning a decade",
        ));
    }
    let times = sorted_unique(
        lags.iter()
            .flat_map(|&l| [l, 1.0 + l])
            .chain([1.0])
            .collect(),
    );
    let sampler = ExactSampler::new(&times, &[h], 1, mode, model)?;
    let one = index_of(&times, 1.0);
    let idx: Vec<(usize, usize)> = lags
        .iter()
        .map(|&l| (index_of(&times, l), index_of(&times, 1.0 + l)))
        .collect();
    let samples: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let f = sampler.sample(derive_seed(seed, i));
            let b1 = f.get(one, 0, 0);
            idx.iter()
                .map(|&(a, b)| 0.5 * (f.get(a, 0, 0).powi(2) + (f.get(b, 0, 0) - b1).powi(2)))
                .collect()
        })
        .collect();
    regress_samples(lags, &samples)
}

/// Report wrapper for [`holder_time_exponent`] with target slope `2H`.
pub fn holder_time_report(h: f64, reg: &HolderRegression, half_width: f64) -> BoundCheckReport {
    BoundCheckReport::new(
        "holder-time",
        "slope of log E(B_{t+l} - B_t)^2 against log l equals 2H",
        &["lag_min", "lag_max"],
        vec![vec![reg.lags[0], reg.lags[reg.lags.len() - 1]]],
        vec![reg.slope],
        vec![reg.slope],
        vec![reg.slope_se],
        reg.intercept.exp(),
        VerdictRule::SlopeWithin {
            target: 2.0 * h,
            half_width,
            se_margin: SE_MARGIN,
        },
    )
    .with_detail("H", h)
    .with_detail("lags", reg.lags.len() as f64)
}

fn log_factor(x: f64, q: f64) -> f64 {
    x.ln().abs().powf(q) + 1.0
}

/// `E(B_t^H - B_t^{H'})²` over the bound `(t^{2H} ∨ t^{2H'})(log²t + 1)|H - H'|²`.
pub fn hurst_direction_bound(
    t_grid: &[f64],
    h_pairs: &[(f64, f64)],
    mode: Normalization,
    model: &CovarianceModel,
) -> Result<BoundCheckReport> {
    if t_grid.is_empty() || h_pairs.is_empty() {
        return Err(Error::config("need at least one time and one Hurst pair"));
    }
    let mut points = Vec::new();
    let (mut stats, mut ratios) = (Vec::new(), Vec::new());
    for &(h, h2) in h_pairs {
        for &t in t_grid {
            let stat = model.increment_second_moment(t, h, t, h2, mode)?;
            let den = t.powf(2.0 * h).max(t.powf(2.0 * h2)) * log_factor(t, 2.0) * (h - h2).powi(2);
            points.push(vec![t, h, h2]);
            stats.push(stat);
            ratios.push(if den > 0.0 { stat / den } else { 0.0 });
        }
    }
    let ts: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let reference = reference_index(&ts, |i| points[i][1] != points[i][2]);
    let n = ratios.len();
    let c = ratios[reference];
    Ok(BoundCheckReport::new(
        "hurst-direction",
        "(t^{2H} v t^{2H'}) (log^2 t + 1) |H - H'|^2",
        &["t", "H", "H2"],
        points,
        stats,
        ratios,
        vec![0.0; n],
        c,
        VerdictRule::BoundedByReference {
            reference,
            factor: 10.0,
            se_margin: SE_MARGIN,
        },
    )
    .with_detail("quadrature_tolerance", model.tolerance()))
}

/// Rectangular increment second moment over
/// `(|Δt|^{2H} ∨ |Δt|^{2H'})(log²|Δt| + 1)|H - H'|²`.
pub fn rectangular_bound(
    t_pairs: &[(f64, f64)],
    h_pairs: &[(f64, f64)],
    mode: Normalization,
    model: &CovarianceModel,
) -> Result<BoundCheckReport> {
    if t_pairs.is_empty() || h_pairs.is_empty() {
        return Err(Error::config(
            "need at least one time pair and one Hurst pair",
        ));
    }
    let mut points = Vec::new();
    let (mut stats, mut ratios) = (Vec::new(), Vec::new());
    for &(h, h2) in h_pairs {
        for &(t, t2) in t_pairs {
            let stat = model.rectangular_increment_second_moment(t, t2, h, h2, mode)?;
            let dt = (t2 - t).abs();
            let den =
                dt.powf(2.0 * h).max(dt.powf(2.0 * h2)) * log_factor(dt, 2.0) * (h - h2).powi(2);
            points.push(vec![t, t2, h, h2]);
            stats.push(stat);
            ratios.push(if den > 0.0 { stat / den } else { 0.0 });
        }
    }
    let dts: Vec<f64> = points.iter().map(|p| (p[1] - p[0]).abs()).collect();
    let reference = reference_index(&dts, |i| points[i][2] != points[i][3]);
    let n = ratios.len();
    let c = ratios[reference];
    Ok(BoundCheckReport::new(
        "rectangular",
        "(|dt|^{2H} v |dt|^{2H'}) (log^2 |dt| + 1) |H - H'|^2",
        &["t", "t2", "H", "H2"],
        points,
        stats,
        ratios,
        vec![0.0; n],
        c,
        VerdictRule::BoundedByReference {
            reference,
            factor: 10.0,
            se_margin: SE_MARGIN,
        },
    )
    .with_detail("quadrature_tolerance", model.tolerance()))
}

/// Monte Carlo `E sup_{H ∈ grid} |B_{t+Δt}^H - B_t^H|^q` over
/// `(|Δt|^{q h_min} ∨ |Δt|^{q h_max})(|log Δt|^q + 1)` for each `Δt` of the sweep.
///
/// With a single Hurst value the logarithmic factor is dropped, so the
/// Brownian ratio is exactly constant.
#[allow(clippy::too_many_arguments)]
pub fn sup_h_moment(
    dts: &[f64],
    q: f64,
    h_grid: &[f64],
    paths: usize,
    seed: u64,
    mode: Normalization,
    model: &CovarianceModel,
) -> Result<BoundCheckReport> {
    check_paths(paths)?;
    check_ascending("dt sweep", dts)?;
    check_ascending("h_grid", h_grid)?;
    if !(q > 0.0) || dts[0] < 0.0 {
        return Err(Error::config("need q > 0 and non-negative time lags"));
    }
    let sampler = ExactSampler::new(dts, h_grid, 1, mode, model)?;
    let nh = h_grid.len();
    let samples: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let f = sampler.sample(derive_seed(seed, i));
            (0..dts.len())
                .map(|ti| {
                    (0..nh)
                        .map(|hi| f.get(ti, hi, 0).abs().powf(q))
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    let (h_min, h_max) = (h_grid[0], h_grid[nh - 1]);
    let mut points = Vec::new();
    let (mut stats, mut ratios, mut ses) = (Vec::new(), Vec::new(), Vec::new());
    for (ti, &dt) in dts.iter().enumerate() {
        let col: Vec<f64> = samples.iter().map(|r| r[ti]).collect();
        let (m, se) = mean_se(&col);
        let den = if nh == 1 {
            dt.powf(q * h_min)
        } else {
            dt.powf(q * h_min).max(dt.powf(q * h_max)) * log_factor(dt, q)
        };
        points.push(vec![dt]);
        stats.push(m);
        if den > 0.0 {
            ratios.push(m / den);
            ses.push(se / den);
        } else {
            ratios.push(0.0);
            ses.push(0.0);
        }
    }
    let reference = reference_index(dts, |_| true);
    let c = ratios[reference];
    Ok(BoundCheckReport::new(
        "sup-h",
        "(|dt|^{q h_min} v |dt|^{q h_max}) (|log dt|^q + 1)",
        &["dt"],
        points,
        stats,
        ratios,
        ses,
        c,
        VerdictRule::BoundedByReference {
            reference,
            factor: 10.0,
            se_margin: SE_MARGIN,
        },
    )
    .with_detail("q", q)
    .with_detail("paths", paths as f64)
    .with_detail("h_points", nh as f64))
}

/// Increment normalization used by [`holder_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolderMode {
    /// `|B_t^H - B_{t'}^{H'}| / [(1+t')^{2ε h_min + h_max} (1 ∧ |Δt|^{h_min} + |ΔH|)^{1-ε}]`.
    Simple,
    /// `|□| / [(1+t')^{2ε h_min + h_max} (1 ∧ |Δt|^{h_min})^{1-ε} |ΔH|^{1-ε}]`.
    Rectangular,
}

impl std::str::FromStr for HolderMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(HolderMode::Simple),
            "rectangular" => Ok(HolderMode::Rectangular),
            other => Err(Error::config(format!("unknown Hölder mode `{other}`"))),
        }
    }
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Largest normalized increment of one field draw over all grid pairs.
pub fn holder_constant(field: &FbmField, eps: f64, mode: HolderMode) -> f64 {
    let (ts, hs, d) = (field.t_grid(), field.h_grid(), field.dim());
    let (h_min, h_max) = (hs[0], hs[hs.len() - 1]);
    let growth = 2.0 * eps * h_min + h_max;
    let time_factor = |dt: f64| 1.0f64.min(dt.powf(h_min));
    let mut best: f64 = 0.0;
    let mut rect = vec![0.0; d];
    for i in 0..ts.len() {
        for j in i..ts.len() {
            let dt = ts[j] - ts[i];
            let w = (1.0 + ts[j]).powf(growth);
            for a in 0..hs.len() {
                for b in 0..hs.len() {
                    let dh = (hs[b] - hs[a]).abs();
                    match mode {
                        HolderMode::Simple => {
                            if (i == j && b <= a) || (dt == 0.0 && dh == 0.0) {
                                continue;
                            }
                            let inc = norm_diff(field.point(j, b), field.point(i, a));
                            let den = w * (time_factor(dt) + dh).powf(1.0 - eps);
                            best = best.max(inc / den);
                        }
                        HolderMode::Rectangular => {
                            if i == j || b <= a {
                                continue;
                            }
                            for (c, r) in rect.iter_mut().enumerate() {
                                *r = field.get(j, b, c) - field.get(i, b, c) - field.get(j, a, c)
                                    + field.get(i, a, c);
                            }
                            let inc = rect.iter().map(|x| x * x).sum::<f64>().sqrt();
                            let den = w * time_factor(dt).powf(1.0 - eps) * dh.powf(1.0 - eps);
                            best = best.max(inc / den);
                        }
                    }
                }
            }
        }
    }
    best
}

/// Distribution across seeds of [`holder_constant`] at horizons `T` and `2T`
/// (same time step), judged by the stability of the 0.9-quantile.
#[allow(clippy::too_many_arguments)]
pub fn pathwise_holder_constant(
    horizon: f64,
    n_times: usize,
    h_grid: &[f64],
    eps: f64,
    mode: HolderMode,
    seeds: usize,
    seed: u64,
    norm: Normalization,
    model: &CovarianceModel,
) -> Result<BoundCheckReport> {
    check_ascending("h_grid", h_grid)?;
    if n_times < 32 || h_grid.len() < 8 {
        return Err(Error::config("need at least 32 times and 8 Hurst values"));
    }
    if !(eps > 0.0 && eps < 1.0) || seeds < 2 {
        return Err(Error::config("need ε in (0, 1) and at least two seeds"));
    }
    let step = horizon / (n_times - 1) as f64;
    let range = HurstRange::spanning(h_grid)?;
    let mut constants = Vec::with_capacity(2 * seeds);
    let mut points = Vec::with_capacity(2 * seeds);
    for (k, factor) in [1usize, 2].into_iter().enumerate() {
        let n = factor * (n_times - 1);
        let t_max = n as f64 * step;
        let t_grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        let layout = Arc::new(NoiseLayout::new(NoiseConfig::new(step, t_max), range)?);
        let sampler = ProjectionSampler::new(layout, &t_grid, h_grid, norm, model)?;
        let cs: Vec<f64> = (0..seeds as u64)
            .into_par_iter()
            .map(|i| {
                holder_constant(
                    &sampler.sample(derive_seed(seed, (k * seeds) as u64 + i)),
                    eps,
                    mode,
                )
            })
            .collect();
        for (i, c) in cs.into_iter().enumerate() {
            points.push(vec![t_max, i as f64]);
            constants.push(c);
        }
    }
    let a = constants[..seeds].to_vec();
    let b = constants[seeds..].to_vec();
    let n = constants.len();
    let report = BoundCheckReport::new(
        match mode {
            HolderMode::Simple => "pathwise-holder",
            HolderMode::Rectangular => "pathwise-holder-rectangular",
        },
        match mode {
            HolderMode::Simple => "(1+t')^{2 eps h_min + h_max} (1 ^ |dt|^{h_min} + |dH|)^{1-eps}",
            HolderMode::Rectangular => {
                "(1+t')^{2 eps h_min + h_max} (1 ^ |dt|^{h_min})^{1-eps} |dH|^{1-eps}"
            }
        },
        &["horizon", "seed"],
        points,
        constants.clone(),
        constants,
        vec![0.0; n],
        quantile(&a, 0.9),
        VerdictRule::QuantileStability {
            split: seeds,
            quantile: 0.9,
            max_drift: 0.25,
        },
    );
    Ok(report
        .with_detail("eps", eps)
        .with_detail("step", step)
        .with_detail("q50_T", quantile(&a, 0.5))
        .with_detail("q90_T", quantile(&a, 0.9))
        .with_detail("q99_T", quantile(&a, 0.99))
        .with_detail("q50_2T", quantile(&b, 0.5))
        .with_detail("q90_2T", quantile(&b, 0.9))
        .with_detail("q99_2T", quantile(&b, 0.99)))
}

/// `{H} ∪ {H + δ}` ascending, with the index of every member.
fn hurst_family(h: f64, deltas: &[f64]) -> Result<(Vec<f64>, usize, Vec<usize>)> {
    if deltas.is_empty() {
        return Err(Error::config("need at least one δ"));
    }
    for w in deltas.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::config("deltas must be strictly descending"));
        }
    }
    if deltas.iter().any(|&d| !(d > 0.0)) || h + deltas[0] >= 1.0 || h <= 0.0 {
        return Err(Error::config(
            "deltas must be positive with 0 < H < H + δ < 1",
        ));
    }
    let grid = sorted_unique(
        std::iter::once(h)
            .chain(deltas.iter().map(|d| h + d))
            .collect(),
    );
    let base = index_of(&grid, h);
    let others = deltas.iter().map(|d| index_of(&grid, h + d)).collect();
    Ok((grid, base, others))
}

/// Projection field on `[0, horizon]` with step `step` for a Hurst family.
fn family_sampler(
    step: f64,
    horizon: f64,
    grid: &[f64],
    norm: Normalization,
    model: &CovarianceModel,
) -> Result<ProjectionSampler> {
    let n = (horizon / step).round() as usize;
    let t_grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let layout = Arc::new(NoiseLayout::new(
        NoiseConfig::new(step, n as f64 * step),
        HurstRange::spanning(grid)?,
    )?);
    ProjectionSampler::new(layout, &t_grid, grid, norm, model)
}

/// Monte Carlo `E|Y_t^H - Y_t^{H+δ}|² / δ²` on a `(δ, t)` grid for reference
/// solutions started at the origin on a shared field.
#[allow(clippy::too_many_arguments)]
pub fn sde_h_regularity(
    spec: &DriftSpec,
    h: f64,
    deltas: &[f64],
    t_grid: &[f64],
    step: f64,
    eps: f64,
    seeds: usize,
    seed: u64,
    norm: Normalization,
    model: &CovarianceModel,
) -> Result<BoundCheckReport> {
    let (grid, base, others) = hurst_family(h, deltas)?;
    check_ascending("t_grid", t_grid)?;
    if t_grid[0] <= 0.0 || seeds < 2 || !(step > 0.0) {
        return Err(Error::config(
            "need positive times, a positive step and at least two seeds",
        ));
    }
    let horizon = t_grid[t_grid.len() - 1];
    let t_idx: Vec<usize> = t_grid
        .iter()
        .map(|&t| {
            let k = (t / step).round();
            if (k * step - t).abs() > 1e-9 * t.max(1.0) {
                Err(Error::config(format!(
                    "time {t} is not a multiple of the step {step}"
                )))
            } else {
                Ok(k as usize)
            }
        })
        .collect::<Result<_>>()?;
    let sampler = family_sampler(step, horizon, &grid, norm, model)?;
    let nt = t_grid.len();
    // per seed: (δ, t)-major squared differences
    let samples: Vec<Vec<f64>> = (0..seeds as u64)
        .into_par_iter()
        .map(|i| {
            let field = sampler.sample(derive_seed(seed, i));
            let y = solve_reference(
                &field,
                spec,
                &vec![0.0; field.dim()],
                step,
                step,
                horizon,
                false,
            )?;
            let mut out = Vec::with_capacity(deltas.len() * nt);
            for &o in &others {
                for &ti in &t_idx {
                    out.push(norm_diff(y.point(ti, base), y.point(ti, o)).powi(2));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    let (mut stats, mut ratios, mut ses) = (Vec::new(), Vec::new(), Vec::new());
    let mut report_details = Vec::new();
    for (di, &d) in deltas.iter().enumerate() {
        for (tj, &t) in t_grid.iter().enumerate() {
            let col: Vec<f64> = samples.iter().map(|r| r[di * nt + tj]).collect();
            let (m, se) = mean_se(&col);
            points.push(vec![d, t]);
            stats.push(m);
            ratios.push(m / (d * d));
            ses.push(se / (d * d));
        }
        let pathwise: Vec<f64> = samples
            .iter()
            .map(|r| r[di * nt + nt - 1].sqrt() / d.powf(1.0 - eps))
            .collect();
        report_details.push((format!("pathwise_q90_delta_{d}"), quantile(&pathwise, 0.9)));
    }
    let mixing = if spec.kappa > 0.0 {
        t_grid
            .iter()
            .position(|&t| t >= 3.0 / spec.kappa)
            .unwrap_or(nt)
    } else {
        nt
    };
    let c = ratios.iter().copied().fold(0.0, f64::max);
    let mut report = BoundCheckReport::new(
        "sde-h-regularity",
        "|H - H'|^2",
        &["delta", "t"],
        points,
        stats,
        ratios,
        ses,
        c,
        VerdictRule::StableUnderHalving {
            n_times: nt,
            factor: 2.0,
            mixing,
            se_margin: SE_MARGIN,
        },
    )
    .with_detail("eps", eps)
    .with_detail("step", step)
    .with_detail("seeds", seeds as f64);
    for (k, v) in report_details {
        report = report.with_detail(&k, v);
    }
    Ok(report)
}

/// Successive ratios `R(δ_{j+1}) / R(δ_j)`.
pub fn halving_ratios(r: &[f64]) -> Vec<f64> {
    r.windows(2).map(|w| w[1] / w[0]).collect()
}

/// Fine steps per scheme step of reference solutions.
pub const REFERENCE_REFINEMENT: usize = 16;

/// Hölder exponent `β` used by the ergodic check and its slack factor.
pub const ERGODIC_BETA: f64 = 0.9;
pub const ERGODIC_SAFETY: f64 = 2.0;

/// Per-seed halving ratios of the ergodic mean square difference
/// `R(δ)` between the base path and the path at `H + δ`.
#[allow(clippy::too_many_arguments)]
pub fn ergodic_h_regularity(
    spec: &DriftSpec,
    h: f64,
    deltas: &[f64],
    horizon: f64,
    gamma: f64,
    seeds: usize,
    seed: u64,
    ergodic: ErgodicMode,
    norm: Normalization,
    model: &CovarianceModel,
) -> Result<BoundCheckReport> {
    let (grid, base, others) = hurst_family(h, deltas)?;
    for w in deltas.windows(2) {
        if (w[0] / w[1] - 2.0).abs() > 1e-9 {
            return Err(Error::config("consecutive deltas must halve"));
        }
    }
    if seeds < 2 || !(horizon >= 1.0) || !(gamma > 0.0) {
        return Err(Error::config(
            "need at least two seeds, horizon >= 1 and γ > 0",
        ));
    }
    if ergodic == ErgodicMode::Discrete && gamma >= spec.gamma0() {
        return Err(Error::config(format!(
            "γ = {gamma} must be below γ₀ = {}",
            spec.gamma0()
        )));
    }
    let n = (horizon / gamma).round() as usize;
    let horizon = n as f64 * gamma;
    // the continuous mode integrates a reference solution on a 16x finer grid
    let (step, sub) = match ergodic {
        ErgodicMode::Continuous => (gamma / REFERENCE_REFINEMENT as f64, REFERENCE_REFINEMENT),
        ErgodicMode::Discrete => (gamma, 1),
    };
    let sampler = family_sampler(step, horizon, &grid, norm, model)?;
    let times: Vec<f64> = (0..=n * sub).map(|i| i as f64 * step).collect();
    let r: Vec<Vec<f64>> = (0..seeds as u64)
        .into_par_iter()
        .map(|i| {
            let field = sampler.sample(derive_seed(seed, i));
            let m0 = vec![0.0; field.dim()];
            let path = match ergodic {
                ErgodicMode::Continuous => {
                    solve_reference(&field, spec, &m0, step, step, horizon, false)?
                }
                ErgodicMode::Discrete => euler_scheme(&field, spec, &m0, gamma, n)?,
            };
            let a = path.trajectory(base);
            others
                .iter()
                .map(|&o| {
                    Ok(ergodic_mean_sq_diff(
                        &times,
                        &a,
                        &path.trajectory(o),
                        field.dim(),
                        ergodic,
                        None,
                    )?
                    .last())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let pairs = deltas.len() - 1;
    let mut points = Vec::new();
    let (mut stats, mut ratios) = (Vec::new(), Vec::new());
    for (si, rs) in r.iter().enumerate() {
        for (j, q) in halving_ratios(rs).into_iter().enumerate() {
            points.push(vec![si as f64, deltas[j], deltas[j + 1]]);
            stats.push(rs[j + 1]);
            ratios.push(q);
        }
    }
    let calibrated: Vec<f64> = r
        .iter()
        .map(|rs| rs[0] / deltas[0].powf(ERGODIC_BETA))
        .collect();
    let n_ratios = ratios.len();
    let threshold = 2f64.powf(-ERGODIC_BETA) * ERGODIC_SAFETY;
    Ok(BoundCheckReport::new(
        match ergodic {
            ErgodicMode::Continuous => "ergodic-h-regularity-continuous",
            ErgodicMode::Discrete => "ergodic-h-regularity-discrete",
        },
        "R(delta/2) / R(delta) against 2^{-beta} * safety",
        &["seed", "delta", "delta_half"],
        points,
        stats,
        ratios,
        vec![0.0; n_ratios],
        quantile(&calibrated, 0.5),
        VerdictRule::GroupFractionAtMost {
            group: pairs.max(1),
            threshold,
            min_fraction: 0.9,
        },
    )
    .with_detail("beta", ERGODIC_BETA)
    .with_detail("gamma", gamma)
    .with_detail("step", step)
    .with_detail("horizon", horizon))
}

/// Decay check of a moment regression: slope against
/// `-(2p/3)(1 ∧ (4 - 4 h_max)) + 0.15`.
pub fn decay_check(reg: &HolderRegression, p: u32, h_max: f64) -> BoundCheckReport {
    let threshold = -(2.0 * p as f64 / 3.0) * 1.0f64.min(4.0 - 4.0 * h_max) + 0.15;
    BoundCheckReport::new(
        "v-moment-decay",
        "(t+1)^{-(2p/3)(1 ^ (4 - 4 h_max))}",
        &["t_plus_1_min", "t_plus_1_max"],
        vec![vec![reg.lags[0], reg.lags[reg.lags.len() - 1]]],
        vec![reg.slope],
        vec![reg.slope],
        vec![reg.slope_se],
        reg.intercept.exp(),
        VerdictRule::SlopeAtMost {
            threshold,
            se_margin: SE_MARGIN,
        },
    )
    .with_detail("p", p as f64)
    .with_detail("h_max", h_max)
}

/// Regression of `E|V_t^{H,K}|^{2p}` on `t + 1` together with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VDecayReport {
    pub regression: HolderRegression,
    pub centering: f64,
    pub report: BoundCheckReport,
}

/// `V_t = (1/(t+1)) ∫_0^{t+1} |Ū_s^H - Ū_s^K|² ds - centering` of one fOU
/// draw at the requested times.
fn v_values(
    path_a: &[f64],
    path_b: &[f64],
    times: &[f64],
    at: &[f64],
    centering: f64,
) -> Result<Vec<f64>> {
    let s = ergodic_mean_sq_diff(
        times,
        path_a,
        path_b,
        1,
        ErgodicMode::Continuous,
        Some(centering),
    )?;
    let v = s.centered();
    at.iter()
        .map(|&t| {
            s.times
                .iter()
                .position(|&x| (x - t).abs() <= 1e-9 * t.max(1.0))
                .map(|i| v[i])
                .ok_or_else(|| Error::config(format!("time {t} is not on the fOU grid")))
        })
        .collect()
}

/// Monte Carlo decay of `E|V_t^{H,K}|^{2p}` for stationary fOU pairs, centered
/// by the quadrature value of `E|Ū_0^H - Ū_0^K|²`.
#[allow(clippy::too_many_arguments)]
pub fn v_moment_decay(
    h: f64,
    k: f64,
    p: u32,
    t_grid: &[f64],
    step: f64,
    seeds: usize,
    seed: u64,
    norm: Normalization,
    model: &CovarianceModel,
) -> Result<VDecayReport> {
    check_paths(seeds)?;
    check_ascending("t_grid", t_grid)?;
    if t_grid[0] < 0.0 || (t_grid[t_grid.len() - 1] + 1.0) / (t_grid[0] + 1.0) < 10.0 - 1e-9 {
        return Err(Error::config("t + 1 must span at least a decade"));
    }
    if p == 0 || h == k {
        return Err(Error::config("need p >= 1 and H != K"));
    }
    let grid = sorted_unique(vec![h, k]);
    let (ia, ib) = (index_of(&grid, h), index_of(&grid, k));
    let centering = stationary_sq_diff(h, k, DEFAULT_FOU_TOLERANCE, model, norm)?;
    let horizon = ((t_grid[t_grid.len() - 1] + 1.0) / step).ceil() * step;
    let sampler = FouSampler::new(step, horizon, &grid, 1, DEFAULT_FOU_TOLERANCE, norm, model)?;
    let samples: Vec<Vec<f64>> = (0..seeds as u64)
        .into_par_iter()
        .map(|i| {
            let path = sampler.sample(derive_seed(seed, i));
            let v = v_values(
                &path.path(ia, 0),
                &path.path(ib, 0),
                &path.t_grid,
                t_grid,
                centering,
            )?;
            Ok(v.into_iter().map(|x| x.abs().powi(2 * p as i32)).collect())
        })
        .collect::<Result<_>>()?;
    let lags: Vec<f64> = t_grid.iter().map(|t| t + 1.0).collect();
    let regression = regress_samples(&lags, &samples)?;
    let report = decay_check(&regression, p, h.max(k))
        .with_detail("centering", centering)
        .with_detail("step", step);
    Ok(VDecayReport {
        regression,
        centering,
        report,
    })
}

/// `|r_sym(s)| / (1 ∧ s^{2 h_max - 2})` over a lag grid, bounded by ten times
/// its value at the lag closest to 1.
pub fn covariance_decay_check(
    h: f64,
    k: f64,
    s_grid: &[f64],
    h_max: f64,
    tol: f64,
    model: &CovarianceModel,
) -> Result<BoundCheckReport> {
    let profile = covariance_decay_profile(h, k, s_grid, Some(h_max), tol, model)?;
    let reference = reference_index(s_grid, |_| true);
    let points = profile.rows.iter().map(|r| vec![r.s]).collect();
    let stats = profile.rows.iter().map(|r| r.r).collect();
    let ratios: Vec<f64> = profile.rows.iter().map(|r| r.ratio).collect();
    let n = ratios.len();
    let c = ratios[reference];
    Ok(BoundCheckReport::new(
        "covariance-decay",
        "1 ^ s^{2 h_max - 2}",
        &["s"],
        points,
        stats,
        ratios,
        vec![0.0; n],
        c,
        VerdictRule::BoundedByReference {
            reference,
            factor: 10.0,
            se_margin: 0.0,
        },
    )
    .with_detail("h", h)
    .with_detail("k", k)
    .with_detail("h_max", h_max))
}

/// Largest gap between the covariances of shifted increments
/// `(B_{t+s}^H - B_s^H, B_{t'+s}^K - B_s^K)` and of `(B_t^H, B_{t'}^K)`.
pub fn law_identity_check(
    times: &[f64],
    shifts: &[f64],
    pairs: &[(f64, f64)],
    threshold: f64,
    mode: Normalization,
    model: &CovarianceModel,
) -> Result<BoundCheckReport> {
    let mut points = Vec::new();
    let (mut stats, mut gaps) = (Vec::new(), Vec::new());
    for &(h, k) in pairs {
        for &t in times {
            for &t2 in times {
                for &s in shifts {
                    let c = |u: f64, hu: f64, v: f64, kv: f64| {
                        model.cross_covariance(u, hu, v, kv, mode)
                    };
                    let shifted =
                        c(t + s, h, t2 + s, k)? - c(t + s, h, s, k)? - c(s, h, t2 + s, k)?
                            + c(s, h, s, k)?;
                    let plain = c(t, h, t2, k)?;
                    points.push(vec![t, t2, s, h, k]);
                    stats.push(plain);
                    gaps.push((shifted - plain).abs());
                }
            }
        }
    }
    let n = gaps.len();
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    Ok(BoundCheckReport::new(
        "law-identity",
        "|Cov(shifted increments) - Cov(B_t^H, B_t'^K)|",
        &["t", "t2", "s", "H", "K"],
        points,
        stats,
        gaps,
        vec![0.0; n],
        worst,
        VerdictRule::AllAtMost {
            threshold,
            se_margin: 0.0,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_regression() {
        let lags = [0.1, 0.3, 1.0, 3.0, 10.0];
        let m: Vec<f64> = lags.iter().map(|l: &f64| l.powf(1.4)).collect();
        let r = HolderRegression::fit(&lags, &m).unwrap();
        assert!((r.slope - 1.4).abs() < 1e-12);
        assert!(r.residuals.iter().all(|e| e.abs() < 1e-12));
        assert!(HolderRegression::fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn rules_are_pure_functions_of_ratios() {
        let rule = VerdictRule::BoundedByReference {
            reference: 1,
            factor: 10.0,
            se_margin: 3.0,
        };
        assert!(rule.evaluate(&[5.0, 1.0, 9.0], &[0.0; 3]));
        assert!(!rule.evaluate(&[11.0, 1.0], &[0.0; 2]));
        assert!(rule.evaluate(&[11.0, 1.0], &[0.5, 0.0]));
        let g = VerdictRule::GroupFractionAtMost {
            group: 2,
            threshold: 1.0,
            min_fraction: 0.5,
        };
        assert!(g.evaluate(&[0.5, 0.5, 2.0, 0.1], &[0.0; 4]));
        assert!(!g.evaluate(&[0.5, 1.5, 2.0, 0.1], &[0.0; 4]));
        let q = VerdictRule::QuantileStability {
            split: 2,
            quantile: 0.9,
            max_drift: 0.25,
        };
        assert!(q.evaluate(&[1.0, 1.0, 1.1, 1.1], &[0.0; 4]));
        assert!(!q.evaluate(&[1.0, 1.0, 2.0, 2.0], &[0.0; 4]));
        let s = VerdictRule::StableUnderHalving {
            n_times: 2,
            factor: 2.0,
            mixing: 0,
            se_margin: 0.0,
        };
        assert!(s.evaluate(&[1.0, 0.9, 1.5, 1.4], &[0.0; 4]));
        assert!(!s.evaluate(&[1.0, 1.2, 1.5, 1.4], &[0.0; 4]));
        assert!(!s.evaluate(&[1.0, 0.9, 3.0, 2.0], &[0.0; 4]));
    }

    #[test]
    fn synthetic_halving() {
        let r: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|d: &f64| 3.0 * d.powf(0.9))
            .collect();
        for q in halving_ratios(&r) {
            assert!((q - 2f64.powf(-0.9)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_series_fails_decay() {
        let t = [2.0, 5.0, 10.0, 50.0, 101.0];
        let reg = HolderRegression::fit(&t, &[0.3; 5]).unwrap();
        assert_eq!(reg.slope, 0.0);
        assert!(!decay_check(&reg, 1, 0.6).verdict);
        let m: Vec<f64> = t.iter().map(|x: &f64| x.powf(-1.0)).collect();
        assert!(decay_check(&HolderRegression::fit(&t, &m).unwrap(), 1, 0.6).verdict);
    }

    #[test]
    fn holder_constant_trivial_fields() {
        let ts: Vec<f64> = (0..5).map(|i| i as f64 * 0.25).collect();
        let zero = FbmField::from_fn(
            ts.clone(),
            vec![0.3, 0.7],
            1,
            Normalization::UnitVariance,
            |_, _, _| 0.0,
        );
        assert_eq!(holder_constant(&zero, 0.1, HolderMode::Simple), 0.0);
        assert_eq!(holder_constant(&zero, 0.1, HolderMode::Rectangular), 0.0);
        // a single Hurst value reduces to the time-only quotient
        let lin = FbmField::from_fn(ts, vec![0.5], 1, Normalization::UnitVariance, |t, _, _| t);
        let c = holder_constant(&lin, 0.5, HolderMode::Simple);
        let expect = (0..5)
            .flat_map(|i| (i + 1..5).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (a, b) = (i as f64 * 0.25, j as f64 * 0.25);
                (b - a)
                    / ((1.0 + b).powf(0.5 * 0.5 * 2.0 + 0.5) * (b - a).powf(0.5).min(1.0).powf(0.5))
            })
            .fold(0.0, f64::max);
        assert!((c - expect).abs() < 1e-14);
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert!((quantile(&[0.0, 10.0], 0.9) - 9.0).abs() < 1e-12);
    }
}
