//! Exact (Cholesky) and projection (shared white noise) field samplers.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::covariance::{CovarianceModel, Normalization};
use super::field::{check_ascending, FbmField, SamplerKind};
use super::kernel::check_hurst;
use super::noise::{NoiseLayout, WhiteNoiseGrid};
use crate::cheb::ChebyshevNodes;
use crate::error::{Error, Result};
use crate::rng::{task_stream, GaussianStream};

/// Exact Gaussian sampler: Cholesky factor of the model covariance over all
/// `(t, H)` grid points with `t != 0`, factored once and reused per seed.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    t_grid: Vec<f64>,
    h_grid: Vec<f64>,
    dim: usize,
    mode: Normalization,
    /// Flat index into the field of each factored point.
    slots: Vec<(usize, usize)>,
    covariance: DMatrix<f64>,
    factor: DMatrix<f64>,
    ridge: f64,
}

impl ExactSampler {
    pub fn new(
        t_grid: &[f64],
        h_grid: &[f64],
        dim: usize,
        mode: Normalization,
        model: &CovarianceModel,
    ) -> Result<Self> {
        check_ascending("t_grid", t_grid)?;
        check_ascending("h_grid", h_grid)?;
        for &h in h_grid {
            check_hurst(h)?;
        }
        if dim == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        let mut slots = Vec::new();
        let mut points = Vec::new();
        for (ti, &t) in t_grid.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            for (hi, &h) in h_grid.iter().enumerate() {
                slots.push((ti, hi));
                points.push((t, h));
            }
        }
        let covariance = model.covariance_matrix(&points, mode)?;
        let (factor, ridge) = factorize(&covariance)?;
        Ok(Self {
            t_grid: t_grid.to_vec(),
            h_grid: h_grid.to_vec(),
            dim,
            mode,
            slots,
            covariance,
            factor,
            ridge,
        })
    }

    /// Covariance matrix of the factored points (row-major over `(t, H)`, `t != 0`).
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Diagonal ridge that was added to make the factorization succeed (0 if none).
    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn sample(&self, seed: u64) -> FbmField {
        let mut field = FbmField::zeros(
            self.t_grid.clone(),
            self.h_grid.clone(),
            self.dim,
            self.mode,
            seed,
            SamplerKind::Exact,
        );
        let n = self.slots.len();
        for c in 0..self.dim {
            let mut g = GaussianStream::new(seed, task_stream(c as u64, 2));
            let z = DVector::from_fn(n, |_, _| g.next_gaussian());
            let x = &self.factor * z;
            for (k, &(ti, hi)) in self.slots.iter().enumerate() {
                field.set(ti, hi, c, x[k]);
            }
        }
        field
    }
}

fn factorize(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if cov.nrows() == 0 {
        return Ok((cov.clone(), 0.0));
    }
    if let Some(ch) = Cholesky::new(cov.clone()) {
        return Ok((ch.l(), 0.0));
    }
    let max_diag = cov.diagonal().iter().copied().fold(0.0, f64::max);
    let ridge = 1e-10 * max_diag;
    let mut m = cov.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += ridge;
    }
    match Cholesky::new(m) {
        Some(ch) => Ok((ch.l(), ridge)),
        None => Err(Error::Model(
            "covariance matrix is not positive definite even with a 1e-10 relative ridge".into(),
        )),
    }
}

/// One-shot exact draw.
pub fn sample_field_exact(
    t_grid: &[f64],
    h_grid: &[f64],
    dim: usize,
    seed: u64,
    mode: Normalization,
    model: &CovarianceModel,
) -> Result<FbmField> {
    Ok(ExactSampler::new(t_grid, h_grid, dim, mode, model)?.sample(seed))
}

/// `(m^{a+1} - (m-1)^{a+1}) / Γ(a+2)` for `m >= 1`.
fn cell_weight(a: f64, m: f64, g: f64) -> f64 {
    if m <= 1.0 {
        return 1.0 / g;
    }
    let e = a + 1.0;
    -(m.powf(e) * (e * (-1.0 / m).ln_1p()).exp_m1()) / g
}

/// `(x+t)^{a+1} - x^{a+1}` for `x > |t|`.
fn far_primitive(a: f64, x: f64, t: f64) -> f64 {
    let e = a + 1.0;
    x.powf(e) * (e * (t / x).ln_1p()).exp_m1()
}

/// Summary of the bias budget of a projection sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBias {
    /// Largest omitted-tail variance over the grid (unit-variance scale).
    pub truncation: f64,
    pub step: f64,
    pub lower: f64,
}

struct HurstPlan {
    a: f64,
    scale: f64,
    kernel_hat: Vec<Complex<f64>>,
    /// Far-cell coefficients at each interpolation node, row-major (node, cell).
    far_at_nodes: Vec<f64>,
}

/// Sampler realizing `B̂_t^H = Σ_cells w_cell(t,H) ΔW_cell / |cell|` with
/// exact per-cell kernel integrals, for all `H` from one noise draw.
pub struct ProjectionSampler {
    layout: Arc<NoiseLayout>,
    t_grid: Vec<f64>,
    h_grid: Vec<f64>,
    mode: Normalization,
    positions: Vec<usize>,
    origin: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    nodes: Option<ChebyshevNodes>,
    n_eval: usize,
    plans: Vec<HurstPlan>,
}

impl std::fmt::Debug for ProjectionSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjectionSampler")
            .field("t_points", &self.t_grid.len())
            .field("h_grid", &self.h_grid)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

const CHEBYSHEV_DEGREE: usize = 32;

impl ProjectionSampler {
    pub fn new(
        layout: Arc<NoiseLayout>,
        t_grid: &[f64],
        h_grid: &[f64],
        mode: Normalization,
        model: &CovarianceModel,
    ) -> Result<Self> {
        check_ascending("t_grid", t_grid)?;
        check_ascending("h_grid", h_grid)?;
        let range = layout.hurst_range();
        for &h in h_grid {
            check_hurst(h)?;
            if !range.contains(h) {
                return Err(Error::config(format!(
                    "H = {h} lies outside the Hurst range [{}, {}] the noise truncation was sized for",
                    range.h_min(),
                    range.h_max()
                )));
            }
        }
        let mut positions = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            positions.push(layout.position(t).ok_or_else(|| {
                Error::config(format!(
                    "time {t} is outside [{}, {}] or not aligned to the noise step {}",
                    layout.config().t_min,
                    layout.upper(),
                    layout.step()
                ))
            })?);
        }
        let origin = layout.position(0.0).expect("0 lies on the fine grid");
        let n = layout.n_fine();
        let fft_len = (2 * n + 2).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);

        let nodes = if t_grid.len() > CHEBYSHEV_DEGREE + 1 {
            Some(ChebyshevNodes::new(
                t_grid[0],
                t_grid[t_grid.len() - 1],
                CHEBYSHEV_DEGREE,
            ))
        } else {
            None
        };
        let step = layout.step();
        let edges = layout.coarse_edges().to_vec();
        let mut plans = Vec::with_capacity(h_grid.len());
        for &h in h_grid {
            let a = h - 0.5;
            let g = gamma(a + 2.0);
            let scale = match mode {
                Normalization::Raw => 1.0,
                Normalization::UnitVariance => 1.0 / model.normalization_constant(h)?,
            };
            let da = step.powf(a);
            let mut buf = vec![Complex::new(0.0, 0.0); fft_len];
            for m in 1..=n {
                buf[m] = Complex::new(da * cell_weight(a, m as f64, g), 0.0);
            }
            forward.process(&mut buf);
            let eval_points: Vec<f64> = match &nodes {
                Some(ch) => ch.nodes().to_vec(),
                None => t_grid.to_vec(),
            };
            let mut far_at_nodes =
                Vec::with_capacity(eval_points.len() * (edges.len().saturating_sub(1)));
            for &t in &eval_points {
                for w in edges.windows(2) {
                    far_at_nodes.push(far_coefficient(a, g, w[0], w[1], t));
                }
            }
            plans.push(HurstPlan {
                a,
                scale,
                kernel_hat: buf,
                far_at_nodes,
            });
        }
        Ok(Self {
            layout,
            t_grid: t_grid.to_vec(),
            h_grid: h_grid.to_vec(),
            mode,
            positions,
            origin,
            fft_len,
            forward,
            inverse,
            n_eval: nodes.as_ref().map_or(t_grid.len(), |ch| ch.nodes().len()),
            nodes,
            plans,
        })
    }

    pub fn layout(&self) -> &Arc<NoiseLayout> {
        &self.layout
    }

    pub fn bias(&self) -> ProjectionBias {
        ProjectionBias {
            truncation: self.layout.truncation_bound(),
            step: self.layout.step(),
            lower: self.layout.lower(),
        }
    }

    /// Generate the noise for `seed` and map it to a field.
    pub fn sample(&self, seed: u64) -> FbmField {
        let noise = WhiteNoiseGrid::generate(self.layout.clone(), seed);
        self.apply(&noise)
    }

    pub fn apply(&self, noise: &WhiteNoiseGrid) -> FbmField {
        assert!(Arc::ptr_eq(noise.layout(), &self.layout) || **noise.layout() == *self.layout);
        let d = self.layout.dim();
        let n = self.layout.n_fine();
        let mut field = FbmField::zeros(
            self.t_grid.clone(),
            self.h_grid.clone(),
            d,
            self.mode,
            noise.seed(),
            SamplerKind::Projection,
        );
        let inv_len = 1.0 / self.fft_len as f64;
        let mut xi_hat = vec![Complex::new(0.0, 0.0); self.fft_len];
        let mut work = vec![Complex::new(0.0, 0.0); self.fft_len];
        for c in 0..d {
            xi_hat.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
            for (j, &x) in noise.fine(c).iter().enumerate() {
                xi_hat[j] = Complex::new(x, 0.0);
            }
            self.forward.process(&mut xi_hat);
            let coarse = noise.coarse(c);
            let nc = coarse.len();
            for (hi, plan) in self.plans.iter().enumerate() {
                for k in 0..self.fft_len {
                    work[k] = xi_hat[k] * plan.kernel_hat[k];
                }
                self.inverse.process(&mut work);
                let x0 = if self.origin <= n {
                    work[self.origin].re * inv_len
                } else {
                    0.0
                };
                let far: Vec<f64> = if nc == 0 {
                    vec![0.0; self.n_eval]
                } else {
                    plan.far_at_nodes
                        .chunks(nc)
                        .map(|row| row.iter().zip(coarse).map(|(w, z)| w * z).sum())
                        .collect()
                };
                for (ti, &p) in self.positions.iter().enumerate() {
                    let t = self.t_grid[ti];
                    if t == 0.0 {
                        continue;
                    }
                    let tail = match &self.nodes {
                        Some(ch) => ch.eval(&far, t),
                        None => far[ti],
                    };
                    let v = work[p].re * inv_len - x0 + tail;
                    field.set(ti, hi, c, plan.scale * v);
                }
            }
        }
        field
    }

    /// Exact covariance of the sampler output, `E B̂_{t_i}^{H_j} B̂_{t_k}^{H_l}`
    /// per component, up to the interpolation of the far-past contribution.
    pub fn projection_covariance(&self, ti: usize, hj: usize, tk: usize, hl: usize) -> f64 {
        let step = self.layout.step();
        let n = self.layout.n_fine();
        let (p1, p2) = (self.positions[ti], self.positions[tk]);
        let (t1, t2) = (self.t_grid[ti], self.t_grid[tk]);
        if t1 == 0.0 || t2 == 0.0 {
            return 0.0;
        }
        let (pa, pb) = (&self.plans[hj], &self.plans[hl]);
        let (ga, gb) = (gamma(pa.a + 2.0), gamma(pb.a + 2.0));
        let coef = |a: f64, g: f64, p: usize, j: usize| -> f64 {
            let w = |q: usize| {
                if q > j {
                    cell_weight(a, (q - j) as f64, g)
                } else {
                    0.0
                }
            };
            w(p) - w(self.origin)
        };
        let mut acc = 0.0;
        for j in 0..n {
            acc += coef(pa.a, ga, p1, j) * coef(pb.a, gb, p2, j);
        }
        acc *= step.powf(pa.a + pb.a) * step;
        for w in self.layout.coarse_edges().windows(2) {
            let width = w[1] - w[0];
            acc += far_coefficient(pa.a, ga, w[0], w[1], t1)
                * far_coefficient(pb.a, gb, w[0], w[1], t2)
                * width;
        }
        acc * pa.scale * pb.scale
    }
}

/// Multiplier of a far-past increment over `[-x_hi, -x_lo]` in `B̂_t`.
fn far_coefficient(a: f64, g: f64, x_lo: f64, x_hi: f64, t: f64) -> f64 {
    if t == 0.0 || a == 0.0 {
        return 0.0;
    }
    (far_primitive(a, x_hi, t) - far_primitive(a, x_lo, t)) / (g * (x_hi - x_lo))
}

/// Map a noise draw to a field on the given grids.
pub fn sample_field_mvn(
    noise: &WhiteNoiseGrid,
    t_grid: &[f64],
    h_grid: &[f64],
    mode: Normalization,
    model: &CovarianceModel,
) -> Result<FbmField> {
    Ok(ProjectionSampler::new(noise.layout().clone(), t_grid, h_grid, mode, model)?.apply(noise))
}
