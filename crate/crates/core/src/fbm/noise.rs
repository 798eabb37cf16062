//! Discretized driving white noise shared by every Hurst index.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::kernel::{kernel_gamma, HurstRange};
use crate::error::{Error, Result};
use crate::quad::{integrate_power_tail, QuadConfig};
use crate::rng::{task_stream, GaussianStream};

/// Parameters of the noise discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Fine cell width `Δ`.
    pub step: f64,
    /// Earliest time at which the field will be evaluated (`<= 0`).
    pub t_min: f64,
    /// Horizon `T` (`>= 0`).
    pub t_max: f64,
    pub dim: usize,
    /// Bound on the variance of the omitted kernel tail beyond `-L`.
    pub tail_tolerance: f64,
    /// Width ratio of consecutive cells in the geometric far-past region.
    pub tail_ratio: f64,
}

impl NoiseConfig {
    pub fn new(step: f64, t_max: f64) -> Self {
        Self {
            step,
            t_min: 0.0,
            t_max,
            dim: 1,
            tail_tolerance: 1e-4,
            tail_ratio: 1.05,
        }
    }

    pub fn with_t_min(mut self, t_min: f64) -> Self {
        self.t_min = t_min;
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = tol;
        self
    }
}

pub(crate) fn aligned_index(x: f64, origin: f64, step: f64) -> Option<usize> {
    let p = (x - origin) / step;
    let r = p.round();
    if r < 0.0 || (p - r).abs() > 1e-9 * p.abs().max(1.0) {
        None
    } else {
        Some(r as usize)
    }
}

/// Raw variance of the kernel mass of `B_t^H` on `(-∞, -l]`.
pub fn tail_variance(h: f64, t: f64, l: f64) -> Result<f64> {
    let a = h - 0.5;
    if a == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let g = kernel_gamma(h);
    let cfg = QuadConfig::with_abs_tol(1e-14);
    let est = integrate_power_tail(
        |x: f64| {
            let d = x.powf(a) * (a * (t / x).ln_1p()).exp_m1();
            d * d
        },
        l,
        2.0 - 2.0 * a,
        &cfg,
    )?;
    Ok(est.value / (g * g))
}

/// Cell geometry of a [`WhiteNoiseGrid`].
///
/// Uniform cells of width `Δ` cover `[-L_fine, T]` with `0` on a cell
/// boundary; below `-L_fine` the past is covered by cells whose widths grow
/// geometrically down to the truncation point `-L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLayout {
    config: NoiseConfig,
    hurst: HurstRange,
    fine_start: f64,
    n_fine: usize,
    /// Distances from the origin of the far-past cell edges, ascending from `L_fine` to `L`.
    coarse_edges: Vec<f64>,
    truncation: f64,
    truncation_bound: f64,
}

impl NoiseLayout {
    pub fn new(config: NoiseConfig, hurst: HurstRange) -> Result<Self> {
        let NoiseConfig {
            step,
            t_min,
            t_max,
            dim,
            tail_tolerance,
            tail_ratio,
        } = config;
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::config(format!(
                "noise step must be positive, got {step}"
            )));
        }
        if t_min > 0.0 || t_max < 0.0 {
            return Err(Error::config(format!(
                "noise window [{t_min}, {t_max}] must contain 0"
            )));
        }
        if dim == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        if !(tail_tolerance > 0.0) {
            return Err(Error::config("tail tolerance must be positive"));
        }
        if !(tail_ratio > 1.0) {
            return Err(Error::config("tail cell ratio must exceed 1"));
        }
        if aligned_index(t_min, 0.0, -step).is_none() && t_min != 0.0 {
            return Err(Error::config(format!(
                "t_min = {t_min} is not a multiple of the step {step}"
            )));
        }
        if aligned_index(t_max, 0.0, step).is_none() {
            return Err(Error::config(format!(
                "t_max = {t_max} is not a multiple of the step {step}"
            )));
        }
        let span = t_max - t_min;
        let l_fine = (((-t_min + 2.0 * span) / step).ceil() * step).max(step);
        let n_fine = ((l_fine + t_max) / step).round() as usize;

        let hs: Vec<f64> = (0..=8)
            .map(|i| hurst.h_min() + (hurst.h_max() - hurst.h_min()) * i as f64 / 8.0)
            .collect();
        let worst = |l: f64| -> Result<f64> {
            let mut w: f64 = 0.0;
            for &h in &hs {
                let c2 = 1.0
                    / (statrs::function::gamma::gamma(2.0 * h + 1.0)
                        * (std::f64::consts::PI * h).sin());
                w = w.max(tail_variance(h, t_max, l)? / c2);
                w = w.max(tail_variance(h, t_min, l)? / c2);
            }
            Ok(w)
        };
        let mut l = l_fine;
        let mut bound = worst(l)?;
        if bound > tail_tolerance {
            let mut lo = l;
            while bound > tail_tolerance {
                lo = l;
                l *= 2.0;
                if l > 1e300 {
                    return Err(Error::config("tail tolerance unreachable"));
                }
                bound = worst(l)?;
            }
            for _ in 0..12 {
                let mid = (lo * l).sqrt();
                let bm = worst(mid)?;
                if bm <= tail_tolerance {
                    l = mid;
                    bound = bm;
                } else {
                    lo = mid;
                }
            }
        }
        let mut coarse_edges = vec![l_fine];
        if l > l_fine {
            let mut x = l_fine;
            let mut width = step;
            while x < l {
                width *= tail_ratio;
                let next = (x + width).min(l);
                let next = if l - next < 0.5 * width { l } else { next };
                coarse_edges.push(next);
                x = next;
            }
            if coarse_edges.len() > 20_000 {
                coarse_edges = geometric_edges(l_fine, l, tail_ratio);
            }
        }
        Ok(Self {
            config,
            hurst,
            fine_start: -l_fine,
            n_fine,
            coarse_edges,
            truncation: l,
            truncation_bound: bound,
        })
    }

    pub fn config(&self) -> &NoiseConfig {
        &self.config
    }

    pub fn hurst_range(&self) -> HurstRange {
        self.hurst
    }

    pub fn step(&self) -> f64 {
        self.config.step
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    /// `-L`.
    pub fn lower(&self) -> f64 {
        -self.truncation
    }

    /// `T`.
    pub fn upper(&self) -> f64 {
        self.config.t_max
    }

    pub fn fine_start(&self) -> f64 {
        self.fine_start
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn coarse_edges(&self) -> &[f64] {
        &self.coarse_edges
    }

    pub fn n_coarse(&self) -> usize {
        self.coarse_edges.len() - 1
    }

    pub fn cell_count(&self) -> usize {
        self.n_fine + self.n_coarse()
    }

    /// Worst omitted-tail variance (unit-variance scale) over the Hurst range and window.
    pub fn truncation_bound(&self) -> f64 {
        self.truncation_bound
    }

    /// Fine-grid position of time `t`, if aligned and inside `[t_min, T]`.
    pub fn position(&self, t: f64) -> Option<usize> {
        if t < self.config.t_min - 1e-12 || t > self.config.t_max + 1e-12 {
            return None;
        }
        aligned_index(t, self.fine_start, self.config.step)
    }
}

fn geometric_edges(from: f64, to: f64, ratio: f64) -> Vec<f64> {
    let mut edges = vec![from];
    let mut x = from;
    while x < to {
        x = (x * ratio).min(to);
        if to - x < 0.5 * x * (ratio - 1.0) {
            x = to;
        }
        edges.push(x);
    }
    edges
}

/// One realization of the driving noise: a Gaussian increment per cell and
/// component, with variance equal to the cell width.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteNoiseGrid {
    layout: Arc<NoiseLayout>,
    seed: u64,
    fine: Vec<f64>,
    coarse: Vec<f64>,
}

impl WhiteNoiseGrid {
    /// Draw the increments for `seed`. Component `c` uses streams
    /// `task_stream(c, 0)` (fine cells) and `task_stream(c, 1)` (far cells).
    pub fn generate(layout: Arc<NoiseLayout>, seed: u64) -> Self {
        let d = layout.dim();
        let nf = layout.n_fine();
        let nc = layout.n_coarse();
        let mut fine = vec![0.0; d * nf];
        let mut coarse = vec![0.0; d * nc];
        let sd = layout.step().sqrt();
        for c in 0..d {
            let mut g = GaussianStream::new(seed, task_stream(c as u64, 0));
            g.fill_gaussian(&mut fine[c * nf..(c + 1) * nf], sd);
            let mut g = GaussianStream::new(seed, task_stream(c as u64, 1));
            let edges = layout.coarse_edges();
            for k in 0..nc {
                coarse[c * nc + k] = (edges[k + 1] - edges[k]).sqrt() * g.next_gaussian();
            }
        }
        Self {
            layout,
            seed,
            fine,
            coarse,
        }
    }

    pub fn layout(&self) -> &Arc<NoiseLayout> {
        &self.layout
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step(&self) -> f64 {
        self.layout.step()
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Fine increments of component `c`, ordered in time from `-L_fine`.
    pub fn fine(&self, c: usize) -> &[f64] {
        let n = self.layout.n_fine();
        &self.fine[c * n..(c + 1) * n]
    }

    /// Far-past increments of component `c`, ordered from `-L_fine` outward.
    pub fn coarse(&self, c: usize) -> &[f64] {
        let n = self.layout.n_coarse();
        &self.coarse[c * n..(c + 1) * n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> Arc<NoiseLayout> {
        let cfg = NoiseConfig::new(0.1, 2.0).with_dim(2);
        Arc::new(NoiseLayout::new(cfg, HurstRange::new(0.3, 0.7).unwrap()).unwrap())
    }

    #[test]
    fn geometry() {
        let l = layout();
        assert!((l.fine_start() + 4.0).abs() < 1e-12);
        assert_eq!(l.n_fine(), 60);
        assert_eq!(l.position(0.0), Some(40));
        assert_eq!(l.position(2.0), Some(60));
        assert_eq!(l.position(0.05), None);
        assert!(l.truncation_bound() <= 1e-4);
        assert!(l.lower() < -4.0);
        let e = l.coarse_edges();
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*e.last().unwrap(), -l.lower());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let l = layout();
        let a = WhiteNoiseGrid::generate(l.clone(), 9);
        let b = WhiteNoiseGrid::generate(l.clone(), 9);
        assert_eq!(a, b);
        let c = WhiteNoiseGrid::generate(l, 10);
        assert_ne!(a.fine(0), c.fine(0));
    }

    #[test]
    fn brownian_range_needs_no_far_cells() {
        let cfg = NoiseConfig::new(0.5, 1.0);
        let l = NoiseLayout::new(cfg, HurstRange::new(0.5, 0.5).unwrap()).unwrap();
        assert_eq!(l.n_coarse(), 0);
        assert_eq!(l.truncation_bound(), 0.0);
    }

    #[test]
    fn misaligned_horizon_rejected() {
        let cfg = NoiseConfig::new(0.3, 1.0);
        assert!(NoiseLayout::new(cfg, HurstRange::new(0.3, 0.7).unwrap()).is_err());
    }
}
