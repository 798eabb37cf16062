//! Dissipative SDEs `dY = b(Y) dt + dB^H` driven by the shared field:
//! fine-Euler reference solutions, the discrete scheme, and ergodic means.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::FbmField;
use crate::rng::GaussianStream;

/// A drift `b: ℝ^d → ℝ^d`.
pub trait Drift: Send + Sync {
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

impl<F> Drift for F
where
    F: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        self(x, out)
    }
}

/// Drift together with its declared contractivity `κ` and Lipschitz `K` constants.
#[derive(Clone)]
pub struct DriftSpec {
    pub id: String,
    pub kappa: f64,
    pub lipschitz: f64,
    drift: Arc<dyn Drift>,
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriftSpec")
            .field("id", &self.id)
            .field("kappa", &self.kappa)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl DriftSpec {
    pub fn new(
        id: impl Into<String>,
        kappa: f64,
        lipschitz: f64,
        drift: impl Drift + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            kappa,
            lipschitz,
            drift: Arc::new(drift),
        }
    }

    /// `b(x) = -λx`, with `κ = K = λ`.
    pub fn linear(lambda: f64) -> Self {
        Self::new(
            format!("linear({lambda})"),
            lambda,
            lambda.abs(),
            move |x: &[f64], out: &mut [f64]| {
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = -lambda * xi;
                }
            },
        )
    }

    /// `b(x) = -κx + c sin(x)` componentwise, with constants `(κ - |c|, κ + |c|)`.
    pub fn sin_perturbed(kappa: f64, c: f64) -> Self {
        Self::new(
            format!("sin-perturbed({kappa},{c})"),
            kappa - c.abs(),
            kappa + c.abs(),
            move |x: &[f64], out: &mut [f64]| {
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = -kappa * xi + c * xi.sin();
                }
            },
        )
    }

    /// `b ≡ 0`; not dissipative, so only usable outside strict mode.
    pub fn zero() -> Self {
        Self::new("zero", 0.0, 0.0, |_: &[f64], out: &mut [f64]| out.fill(0.0))
    }

    /// Parse `linear:λ`, `sin:κ:c` or `zero`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| -> Result<f64> {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad number `{p}` in drift `{s}`")))
        };
        match parts.as_slice() {
            ["zero"] => Ok(Self::zero()),
            ["linear", l] => Ok(Self::linear(num(l)?)),
            ["sin", k, c] => Ok(Self::sin_perturbed(num(k)?, num(c)?)),
            _ => Err(Error::config(format!(
                "unknown drift `{s}` (expected linear:λ, sin:κ:c or zero)"
            ))),
        }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.drift.eval(x, out)
    }

    pub fn is_dissipative(&self) -> bool {
        self.kappa > 0.0
    }

    /// Largest step bound `γ₀ ≤ 1` with `0 < κξ - 2K²ξ² < 1` on `(0, γ₀)`.
    ///
    /// For the zero drift the condition is void and `γ₀ = 1` by convention.
    pub fn gamma0(&self) -> f64 {
        let (k, l) = (self.kappa, self.lipschitz);
        if k <= 0.0 {
            return if l == 0.0 { 1.0 } else { 0.0 };
        }
        let mut g = (k / (2.0 * l * l)).min(1.0);
        let disc = k * k - 8.0 * l * l;
        if disc >= 0.0 {
            g = g.min((k - disc.sqrt()) / (4.0 * l * l));
        }
        g
    }
}

/// Worst constants seen by [`drift_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub id: String,
    pub trials: usize,
    pub radius: f64,
    /// `min -⟨b(x)-b(y), x-y⟩ / |x-y|²` over the sampled pairs.
    pub observed_kappa: f64,
    /// `max |b(x)-b(y)| / |x-y|`.
    pub observed_lipschitz: f64,
    /// `observed_kappa / κ` (1 means tight).
    pub dissipativity_ratio: f64,
    /// `observed_lipschitz / K`.
    pub lipschitz_ratio: f64,
    pub pass: bool,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

const DRIFT_SLACK: f64 = 1e-9;

/// Spot-check the declared constants on random pairs in a ball.
pub fn drift_report(
    spec: &DriftSpec,
    dim: usize,
    trials: usize,
    radius: f64,
    seed: u64,
) -> Result<DriftReport> {
    if trials == 0 || dim == 0 {
        return Err(Error::config(
            "drift validation needs at least one trial and dimension >= 1",
        ));
    }
    let mut g = GaussianStream::new(seed, 0);
    let draw = |g: &mut GaussianStream| -> Vec<f64> {
        let mut v: Vec<f64> = (0..dim).map(|_| g.next_gaussian()).collect();
        let norm = v
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let r = radius * g.uniform().powf(1.0 / dim as f64);
        v.iter_mut().for_each(|x| *x *= r / norm);
        v
    };
    let mut observed_kappa = f64::INFINITY;
    let mut observed_lipschitz: f64 = 0.0;
    let mut witness = None;
    let (mut bx, mut by) = (vec![0.0; dim], vec![0.0; dim]);
    for _ in 0..trials {
        let x = draw(&mut g);
        let y = draw(&mut g);
        spec.eval(&x, &mut bx);
        spec.eval(&y, &mut by);
        let (mut ip, mut dx2, mut db2) = (0.0, 0.0, 0.0);
        for i in 0..dim {
            let dx = x[i] - y[i];
            let db = bx[i] - by[i];
            ip += db * dx;
            dx2 += dx * dx;
            db2 += db * db;
        }
        if dx2 == 0.0 {
            continue;
        }
        let kap = -ip / dx2;
        let lip = (db2 / dx2).sqrt();
        let bad_k = kap < spec.kappa - DRIFT_SLACK * spec.kappa.abs().max(f64::MIN_POSITIVE);
        let bad_l =
            lip > spec.lipschitz + DRIFT_SLACK * spec.lipschitz.abs().max(f64::MIN_POSITIVE);
        if (bad_k || bad_l) && witness.is_none() {
            witness = Some((x.clone(), y.clone()));
        }
        observed_kappa = observed_kappa.min(kap);
        observed_lipschitz = observed_lipschitz.max(lip);
    }
    let ratio = |obs: f64, decl: f64| if decl != 0.0 { obs / decl } else { f64::NAN };
    Ok(DriftReport {
        id: spec.id.clone(),
        trials,
        radius,
        observed_kappa,
        observed_lipschitz,
        dissipativity_ratio: ratio(observed_kappa, spec.kappa),
        lipschitz_ratio: ratio(observed_lipschitz, spec.lipschitz),
        pass: witness.is_none(),
        witness,
    })
}

/// [`drift_report`] that turns a violation into a validation error.
pub fn validate_drift(
    spec: &DriftSpec,
    dim: usize,
    trials: usize,
    radius: f64,
    seed: u64,
) -> Result<DriftReport> {
    let r = drift_report(spec, dim, trials, radius, seed)?;
    if let Some((x, y)) = &r.witness {
        return Err(Error::validation(format!(
            "drift `{}` violates declared constants (κ = {}, K = {}) at x = {:?}, y = {:?}",
            spec.id, spec.kappa, spec.lipschitz, x, y
        )));
    }
    Ok(r)
}

/// Paths indexed by (time, Hurst, component).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdePath {
    pub t_grid: Vec<f64>,
    pub h_grid: Vec<f64>,
    pub dim: usize,
    values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SdePath {
    pub fn new(t_grid: Vec<f64>, h_grid: Vec<f64>, dim: usize) -> Self {
        let n = t_grid.len() * h_grid.len() * dim;
        Self {
            t_grid,
            h_grid,
            dim,
            values: vec![0.0; n],
            warnings: Vec::new(),
        }
    }

    #[inline]
    fn idx(&self, ti: usize, hi: usize, c: usize) -> usize {
        (ti * self.h_grid.len() + hi) * self.dim + c
    }

    #[inline]
    pub fn get(&self, ti: usize, hi: usize, c: usize) -> f64 {
        self.values[self.idx(ti, hi, c)]
    }

    #[inline]
    pub fn set(&mut self, ti: usize, hi: usize, c: usize, v: f64) {
        let i = self.idx(ti, hi, c);
        self.values[i] = v;
    }

    pub fn point(&self, ti: usize, hi: usize) -> &[f64] {
        let i = self.idx(ti, hi, 0);
        &self.values[i..i + self.dim]
    }

    /// Flattened `(time, component)` trajectory for Hurst index number `hi`.
    pub fn trajectory(&self, hi: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.t_grid.len() * self.dim);
        for ti in 0..self.t_grid.len() {
            out.extend_from_slice(self.point(ti, hi));
        }
        out
    }

    pub fn component(&self, hi: usize, c: usize) -> Vec<f64> {
        (0..self.t_grid.len())
            .map(|ti| self.get(ti, hi, c))
            .collect()
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

/// Index of `t = 0` and index stride realizing `step` on a uniform field grid.
/// `k · step` rounded to 12 decimals, so reported times print cleanly.
fn grid_time(k: usize, step: f64) -> f64 {
    (k as f64 * step * 1e12).round() / 1e12
}

fn stride_from_origin(field: &FbmField, step: f64, n: usize) -> Result<(usize, usize)> {
    let grid = field.t_grid();
    let origin = field
        .t_index(0.0)
        .ok_or_else(|| Error::config("field time grid must contain t = 0"))?;
    if grid.len() < origin + 2 {
        return Err(Error::config("field has no times after 0"));
    }
    let base = grid[origin + 1] - grid[origin];
    let ratio = step / base;
    let stride = ratio.round();
    if stride < 1.0 || (ratio - stride).abs() > 1e-9 * ratio {
        return Err(Error::config(format!(
            "step {step} is not a positive multiple of the field step {base}"
        )));
    }
    let stride = stride as usize;
    let last = origin + stride * n;
    if last >= grid.len() {
        return Err(Error::config(format!(
            "field covers [0, {}] but {n} steps of {step} need [0, {}]",
            grid[grid.len() - 1],
            step * n as f64
        )));
    }
    for k in 0..=n {
        let t = grid[origin + stride * k];
        if (t - k as f64 * step).abs() > 1e-9 * (k as f64 * step).max(1.0) {
            return Err(Error::config("field time grid is not uniform"));
        }
    }
    Ok((origin, stride))
}

fn check_init(y0: &[f64], field: &FbmField) -> Result<()> {
    if y0.len() != field.dim() {
        return Err(Error::config(format!(
            "initial point has dimension {}, field has {}",
            y0.len(),
            field.dim()
        )));
    }
    Ok(())
}

/// Fine-Euler solution of the random ODE `Y_t = Y_0 + ∫_0^t b(Y_s) ds + B_t^H`
/// with internal step `delta`, reported every `out_step` up to `horizon`,
/// for every Hurst index of the field.
pub fn solve_reference(
    field: &FbmField,
    spec: &DriftSpec,
    y0: &[f64],
    delta: f64,
    out_step: f64,
    horizon: f64,
    strict: bool,
) -> Result<SdePath> {
    check_init(y0, field)?;
    let mut warnings = Vec::new();
    if delta * spec.lipschitz >= 0.5 {
        let msg = format!(
            "fine step δ = {delta} with K = {} violates δK < 0.5",
            spec.lipschitz
        );
        if strict {
            return Err(Error::config(msg));
        }
        warnings.push(msg);
    }
    if strict && !spec.is_dissipative() {
        return Err(Error::config(format!(
            "drift `{}` is not dissipative (κ = {})",
            spec.id, spec.kappa
        )));
    }
    let ratio = out_step / delta;
    let sub = ratio.round();
    if sub < 1.0 || (ratio - sub).abs() > 1e-9 * ratio {
        return Err(Error::config(format!(
            "δ = {delta} does not divide the output step {out_step}"
        )));
    }
    let sub = sub as usize;
    let n_out = (horizon / out_step).round() as usize;
    let n_fine = n_out * sub;
    let (origin, stride) = stride_from_origin(field, delta, n_fine)?;
    let d = field.dim();
    let t_grid: Vec<f64> = (0..=n_out).map(|k| grid_time(k, out_step)).collect();
    let mut path = SdePath::new(t_grid, field.h_grid().to_vec(), d);
    let mut b = vec![0.0; d];
    for hi in 0..field.h_grid().len() {
        let mut y = y0.to_vec();
        for c in 0..d {
            path.set(0, hi, c, y[c]);
        }
        for k in 0..n_fine {
            spec.eval(&y, &mut b);
            let (i0, i1) = (origin + k * stride, origin + (k + 1) * stride);
            for c in 0..d {
                y[c] += delta * b[c] + field.get(i1, hi, c) - field.get(i0, hi, c);
            }
            if (k + 1) % sub == 0 {
                let ti = (k + 1) / sub;
                for c in 0..d {
                    path.set(ti, hi, c, y[c]);
                }
            }
        }
    }
    path.warnings = warnings;
    Ok(path)
}

/// The scheme `M_{(k+1)γ} = M_{kγ} + γ b(M_{kγ}) + B_{(k+1)γ} - B_{kγ}`, `k < N`.
pub fn euler_scheme(
    field: &FbmField,
    spec: &DriftSpec,
    m0: &[f64],
    gamma: f64,
    n: usize,
) -> Result<SdePath> {
    check_init(m0, field)?;
    let g0 = spec.gamma0();
    if !(gamma > 0.0) || gamma >= g0 {
        return Err(Error::config(format!(
            "step γ = {gamma} must satisfy 0 < γ < γ₀ = {g0} (0 < κξ - 2K²ξ² < 1 on (0, γ₀), κ = {}, K = {})",
            spec.kappa, spec.lipschitz
        )));
    }
    let (origin, stride) = stride_from_origin(field, gamma, n)?;
    let d = field.dim();
    let t_grid: Vec<f64> = (0..=n).map(|k| grid_time(k, gamma)).collect();
    let mut path = SdePath::new(t_grid, field.h_grid().to_vec(), d);
    let mut b = vec![0.0; d];
    for hi in 0..field.h_grid().len() {
        let mut m = m0.to_vec();
        for c in 0..d {
            path.set(0, hi, c, m[c]);
        }
        for k in 0..n {
            spec.eval(&m, &mut b);
            let (i0, i1) = (origin + k * stride, origin + (k + 1) * stride);
            for c in 0..d {
                m[c] += gamma * b[c] + field.get(i1, hi, c) - field.get(i0, hi, c);
                path.set(k + 1, hi, c, m[c]);
            }
        }
    }
    Ok(path)
}

/// Time-average convention of [`ergodic_mean_sq_diff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErgodicMode {
    /// `(1/(t+1)) ∫_0^{t+1} |a_s - b_s|² ds` by the trapezoid rule.
    Continuous,
    /// `(1/N) Σ_{k=1}^N |a_k - b_k|²`.
    Discrete,
}

impl std::str::FromStr for ErgodicMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(ErgodicMode::Continuous),
            "discrete" => Ok(ErgodicMode::Discrete),
            other => Err(Error::config(format!("unknown ergodic mode `{other}`"))),
        }
    }
}

/// Running ergodic means of `|a - b|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicMeanSeries {
    pub mode: ErgodicMode,
    /// Continuous mode: `t` with averaging window `[0, t+1]`. Discrete mode: `N`.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub centering: Option<f64>,
}

impl ErgodicMeanSeries {
    /// `V` values: running mean minus the centering constant (or the raw mean).
    pub fn centered(&self) -> Vec<f64> {
        let c = self.centering.unwrap_or(0.0);
        self.values.iter().map(|v| v - c).collect()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("series is non-empty")
    }
}

/// Running mean square difference of two trajectories sampled on `times`
/// (flattened `(time, component)` layout with `dim` components).
pub fn ergodic_mean_sq_diff(
    times: &[f64],
    a: &[f64],
    b: &[f64],
    dim: usize,
    mode: ErgodicMode,
    centering: Option<f64>,
) -> Result<ErgodicMeanSeries> {
    if dim == 0 || a.len() != b.len() || a.len() != times.len() * dim {
        return Err(Error::validation(format!(
            "paths do not share the grid: {} and {} values for {} times × {dim} components",
            a.len(),
            b.len(),
            times.len()
        )));
    }
    if times.len() < 2 {
        return Err(Error::validation("ergodic means need at least two times"));
    }
    let sq: Vec<f64> = (0..times.len())
        .map(|i| {
            (0..dim)
                .map(|c| (a[i * dim + c] - b[i * dim + c]).powi(2))
                .sum()
        })
        .collect();
    let (mut out_t, mut out_v) = (Vec::new(), Vec::new());
    match mode {
        ErgodicMode::Continuous => {
            let t0 = times[0];
            let mut integral = 0.0;
            for i in 1..times.len() {
                integral += 0.5 * (sq[i] + sq[i - 1]) * (times[i] - times[i - 1]);
                let window = times[i] - t0;
                if window >= 1.0 - 1e-12 {
                    out_t.push(window - 1.0);
                    out_v.push(integral / window);
                }
            }
            if out_t.is_empty() {
                return Err(Error::validation(
                    "continuous ergodic means need a horizon of at least 1",
                ));
            }
        }
        ErgodicMode::Discrete => {
            let mut sum = 0.0;
            for (k, s) in sq.iter().enumerate().skip(1) {
                sum += s;
                out_t.push(k as f64);
                out_v.push(sum / k as f64);
            }
        }
    }
    Ok(ErgodicMeanSeries {
        mode,
        times: out_t,
        values: out_v,
        centering,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::Normalization;

    #[test]
    fn gamma0_values() {
        assert!((DriftSpec::linear(1.0).gamma0() - 0.5).abs() < 1e-15);
        assert_eq!(DriftSpec::zero().gamma0(), 1.0);
        let s = DriftSpec::sin_perturbed(2.0, 0.5);
        assert!((s.gamma0() - 1.5 / (2.0 * 6.25)).abs() < 1e-15);
        // large κ relative to K activates the upper root
        let s = DriftSpec::new("steep", 10.0, 1.0, |_: &[f64], o: &mut [f64]| o.fill(0.0));
        let g = s.gamma0();
        assert!((10.0 * g - 2.0 * g * g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn drift_validation_examples() {
        let r = validate_drift(&DriftSpec::linear(1.0), 3, 200, 5.0, 1).unwrap();
        assert!((r.dissipativity_ratio - 1.0).abs() < 1e-12);
        assert!((r.lipschitz_ratio - 1.0).abs() < 1e-12);
        assert!(validate_drift(&DriftSpec::sin_perturbed(2.0, 0.5), 1, 2000, 10.0, 2).is_ok());
        let expansive = DriftSpec::new("expansive", 1.0, 1.0, |x: &[f64], o: &mut [f64]| {
            o.copy_from_slice(x)
        });
        let err = validate_drift(&expansive, 2, 10, 1.0, 3).unwrap_err();
        assert!(err.to_string().contains("x = ["));
    }

    #[test]
    fn euler_single_step_and_zero_drift() {
        let field = FbmField::from_fn(
            vec![0.0, 0.1, 0.2],
            vec![0.7],
            1,
            Normalization::Raw,
            |t, _, _| t * t + 3.0 * t,
        );
        let p = euler_scheme(&field, &DriftSpec::linear(1.0), &[1.0], 0.1, 1).unwrap();
        assert!((p.get(1, 0, 0) - (1.0 - 0.1 + field.get(1, 0, 0))).abs() < 1e-15);
        let p = euler_scheme(&field, &DriftSpec::zero(), &[1.0], 0.1, 2).unwrap();
        for k in 0..3 {
            assert!((p.get(k, 0, 0) - 1.0 - field.get(k, 0, 0)).abs() < 1e-15);
        }
        assert!(euler_scheme(&field, &DriftSpec::linear(1.0), &[1.0], 0.6, 1).is_err());
    }

    #[test]
    fn ergodic_trivial_cases() {
        let t: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let a = vec![0.0; t.len()];
        let b = vec![1.0; t.len()];
        for mode in [ErgodicMode::Continuous, ErgodicMode::Discrete] {
            let s = ergodic_mean_sq_diff(&t, &a, &a, 1, mode, None).unwrap();
            assert!(s.values.iter().all(|&v| v == 0.0));
            let s = ergodic_mean_sq_diff(&t, &a, &b, 1, mode, None).unwrap();
            assert!(s.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        }
        let s = ergodic_mean_sq_diff(&t, &a, &b, 1, ErgodicMode::Continuous, Some(1.0)).unwrap();
        assert_eq!(s.times[0], 0.0);
        assert!(s.centered().iter().all(|v| v.abs() < 1e-15));
        assert!(ergodic_mean_sq_diff(&t, &a, &b[1..], 1, ErgodicMode::Discrete, None).is_err());
    }

    #[test]
    fn drift_parsing() {
        assert_eq!(DriftSpec::parse("linear:2").unwrap().kappa, 2.0);
        assert_eq!(DriftSpec::parse("sin:2:0.5").unwrap().lipschitz, 2.5);
        assert!(DriftSpec::parse("cubic").is_err());
    }
}
