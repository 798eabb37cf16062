//! Sampled field values on a (time × Hurst) grid.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::covariance::Normalization;
use crate::error::{Error, Result};

/// Which sampler produced a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Exact,
    Projection,
    Synthetic,
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplerKind::Exact => "exact",
            SamplerKind::Projection => "projection",
            SamplerKind::Synthetic => "synthetic",
        })
    }
}

/// Values `B_t^H` indexed by (time, Hurst, component).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmField {
    t_grid: Vec<f64>,
    h_grid: Vec<f64>,
    dim: usize,
    values: Vec<f64>,
    mode: Normalization,
    seed: u64,
    sampler: SamplerKind,
}

pub(crate) fn check_ascending(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config(format!("{name} is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(format!(
            "{name} must be finite and strictly ascending"
        )));
    }
    Ok(())
}

impl FbmField {
    /// Field with all values zero.
    pub fn zeros(
        t_grid: Vec<f64>,
        h_grid: Vec<f64>,
        dim: usize,
        mode: Normalization,
        seed: u64,
        sampler: SamplerKind,
    ) -> Self {
        let n = t_grid.len() * h_grid.len() * dim;
        Self {
            t_grid,
            h_grid,
            dim,
            values: vec![0.0; n],
            mode,
            seed,
            sampler,
        }
    }

    /// Build a field from a value function, e.g. for synthetic inputs.
    pub fn from_fn(
        t_grid: Vec<f64>,
        h_grid: Vec<f64>,
        dim: usize,
        mode: Normalization,
        mut f: impl FnMut(f64, f64, usize) -> f64,
    ) -> Self {
        let mut field = Self::zeros(t_grid, h_grid, dim, mode, 0, SamplerKind::Synthetic);
        for i in 0..field.t_grid.len() {
            for j in 0..field.h_grid.len() {
                for c in 0..dim {
                    let v = f(field.t_grid[i], field.h_grid[j], c);
                    field.set(i, j, c, v);
                }
            }
        }
        field
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn h_grid(&self) -> &[f64] {
        &self.h_grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Normalization {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampler(&self) -> SamplerKind {
        self.sampler
    }

    pub fn values(&self) -> &[f64] {
        &self.values
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

    /// The path `t ↦ B_t^H` of component `c` for Hurst index number `hi`.
    pub fn path(&self, hi: usize, c: usize) -> Vec<f64> {
        (0..self.t_grid.len())
            .map(|ti| self.get(ti, hi, c))
            .collect()
    }

    /// The vector `B_t^H ∈ ℝ^d`.
    pub fn point(&self, ti: usize, hi: usize) -> &[f64] {
        let i = self.idx(ti, hi, 0);
        &self.values[i..i + self.dim]
    }

    pub fn t_index(&self, t: f64) -> Option<usize> {
        self.t_grid
            .iter()
            .position(|&x| (x - t).abs() <= 1e-9 * t.abs().max(1.0))
    }

    pub fn h_index(&self, h: f64) -> Option<usize> {
        self.h_grid.iter().position(|&x| (x - h).abs() <= 1e-12)
    }

    /// Write `t,H,component,value` rows.
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
