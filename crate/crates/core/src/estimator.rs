//! Empirical measures, exact one-dimensional Wasserstein distances and the
//! grid-argmin Hurst estimator.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm::field::check_ascending;
use crate::fbm::{
    CovarianceModel, FbmField, HurstRange, NoiseConfig, NoiseLayout, Normalization,
    ProjectionSampler,
};
use crate::rng::derive_seed;
use crate::sde::{euler_scheme, solve_reference, DriftSpec};

/// Equal-weight atoms, kept sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::validation(
                "empirical measure needs at least one atom",
            ));
        }
        if atoms.iter().any(|x| x.is_nan()) {
            return Err(Error::validation("empirical measure atoms must not be NaN"));
        }
        atoms.sort_by(f64::total_cmp);
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|x| x + c).collect(),
        }
    }
}

/// Exact `W_p` between two empirical measures on the line, `p ∈ {1, 2}`.
///
/// The quantile functions are step functions with breakpoints at multiples of
/// `1/n_a` and `1/n_b`; merging the breakpoints in integer units of
/// `1/(n_a n_b)` gives the `L^p` distance without discretization.
pub fn wasserstein_1d(a: &EmpiricalMeasure, b: &EmpiricalMeasure, p: u32) -> Result<f64> {
    if p != 1 && p != 2 {
        return Err(Error::config(format!(
            "Wasserstein order must be 1 or 2, got {p}"
        )));
    }
    let (xa, xb) = (a.atoms(), b.atoms());
    let (na, nb) = (xa.len() as u128, xb.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut cur: u128 = 0;
    let mut acc = 0.0;
    while i < xa.len() && j < xb.len() {
        let ea = (i as u128 + 1) * nb;
        let eb = (j as u128 + 1) * na;
        let next = ea.min(eb);
        let diff = (xa[i] - xb[j]).abs();
        let w = (next - cur) as f64;
        acc += w * if p == 1 { diff } else { diff * diff };
        cur = next;
        if ea == next {
            i += 1;
        }
        if eb == next {
            j += 1;
        }
    }
    let mean = acc / (na * nb) as f64;
    Ok(if p == 1 { mean } else { mean.sqrt() })
}

/// Settings of [`estimate_hurst`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Candidate Hurst indices, ascending inside `(0, 1)`.
    pub grid: Vec<f64>,
    pub p: u32,
    /// Number of scheme steps `N` kept for each candidate measure.
    pub n_steps: usize,
    /// Scheme step `γ`.
    pub gamma: f64,
    /// Observation step `h` of the data (recorded, not used by the candidates).
    pub obs_step: f64,
    /// One shared field for all candidates.
    pub crn: bool,
    /// Discarded initial scheme steps; `None` means `⌈1/(κγ)⌉`.
    pub burn_in: Option<usize>,
    pub tail_tolerance: f64,
    pub mode: Normalization,
}

impl EstimatorConfig {
    pub fn new(grid: Vec<f64>, n_steps: usize, gamma: f64) -> Self {
        Self {
            grid,
            p: 2,
            n_steps,
            gamma,
            obs_step: gamma,
            crn: true,
            burn_in: None,
            tail_tolerance: 1e-4,
            mode: Normalization::UnitVariance,
        }
    }

    /// `start:step:end` inclusive.
    pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::config(format!("grid `{s}` must read start:step:end"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let (start, step, end) = (v[0], v[1], v[2]);
        if !(step > 0.0) || end < start {
            return Err(bad());
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect())
    }

    pub fn burn_in_steps(&self, spec: &DriftSpec) -> usize {
        self.burn_in.unwrap_or_else(|| {
            if spec.kappa > 0.0 {
                (1.0 / (spec.kappa * self.gamma)).ceil() as usize
            } else {
                0
            }
        })
    }
}

/// One point of the distance profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    #[serde(rename = "K")]
    pub k: f64,
    pub d: f64,
}

/// Output of [`estimate_hurst`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    #[serde(rename = "H_hat")]
    pub h_hat: f64,
    pub profile: Vec<ProfilePoint>,
    /// `wasserstein-p` for one-dimensional data, `max-componentwise-wasserstein-p` otherwise.
    pub distance: String,
    pub burn_in: usize,
    /// Relative spread `(max d - min d) / max d` below `1e-3`.
    pub flat_profile: bool,
    /// Squared profile increments between neighbouring candidates are
    /// bounded by the mean square distance of the candidate paths.
    pub profile_regularity: Option<bool>,
}

/// Index of the smallest value; ties go to the first (smallest `K`).
pub fn argmin_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] <= v => {}
            _ if v.is_nan() => {}
            _ => best = Some(i),
        }
    }
    best
}

fn component_measures(samples: &[f64], dim: usize) -> Result<Vec<EmpiricalMeasure>> {
    (0..dim)
        .map(|c| EmpiricalMeasure::new(samples.iter().skip(c).step_by(dim).copied().collect()))
        .collect()
}

fn distance(a: &[EmpiricalMeasure], b: &[EmpiricalMeasure], p: u32) -> Result<f64> {
    let mut d: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        d = d.max(wasserstein_1d(x, y, p)?);
    }
    Ok(d)
}

/// Grid-argmin estimator: the candidate `K` whose scheme measure
/// `(1/N) Σ δ_{M^K_{kγ}}` is closest to the empirical measure of the data.
///
/// `observed` is a flattened `(time, component)` array with `dim` components.
pub fn estimate_hurst(
    observed: &[f64],
    dim: usize,
    spec: &DriftSpec,
    cfg: &EstimatorConfig,
    seed: u64,
    model: &CovarianceModel,
) -> Result<HurstEstimate> {
    check_ascending("candidate grid", &cfg.grid)?;
    if cfg.grid[0] <= 0.0 || cfg.grid[cfg.grid.len() - 1] >= 1.0 {
        return Err(Error::config("candidate grid must lie inside (0, 1)"));
    }
    if dim == 0 || !observed.len().is_multiple_of(dim) || observed.len() / dim < 2 {
        return Err(Error::validation(
            "observed data needs at least two atoms per component",
        ));
    }
    if cfg.n_steps == 0 {
        return Err(Error::config("scheme length N must be positive"));
    }
    let obs = component_measures(observed, dim)?;
    let burn = cfg.burn_in_steps(spec);
    let total = cfg.n_steps + burn;
    let horizon = total as f64 * cfg.gamma;
    let t_grid: Vec<f64> = (0..=total).map(|k| k as f64 * cfg.gamma).collect();
    let m0 = vec![0.0; dim];

    let candidate = |field: &FbmField, hi: usize| -> Result<Vec<f64>> {
        let path = euler_scheme(field, spec, &m0, cfg.gamma, total)
            .map_err(|e| Error::config(format!("scheme failed for K = {}: {e}", cfg.grid[hi])))?;
        let idx = if field.h_grid().len() == 1 { 0 } else { hi };
        let traj = path.trajectory(idx);
        Ok(traj[(burn + 1) * dim..].to_vec())
    };

    let layout_for = |grid: &[f64]| -> Result<Arc<NoiseLayout>> {
        let nc = NoiseConfig::new(cfg.gamma, horizon)
            .with_dim(dim)
            .with_tail_tolerance(cfg.tail_tolerance);
        Ok(Arc::new(NoiseLayout::new(nc, HurstRange::spanning(grid)?)?))
    };

    let paths: Vec<Vec<f64>> = if cfg.crn {
        let layout = layout_for(&cfg.grid)?;
        let sampler = ProjectionSampler::new(layout, &t_grid, &cfg.grid, cfg.mode, model)?;
        let field = sampler.sample(seed);
        (0..cfg.grid.len())
            .into_par_iter()
            .map(|hi| candidate(&field, hi))
            .collect::<Result<_>>()?
    } else {
        (0..cfg.grid.len())
            .into_par_iter()
            .map(|hi| {
                let k = cfg.grid[hi];
                let layout = layout_for(&[k])?;
                let sampler = ProjectionSampler::new(layout, &t_grid, &[k], cfg.mode, model)?;
                candidate(&sampler.sample(derive_seed(seed, hi as u64)), hi)
            })
            .collect::<Result<_>>()?
    };

    let mut profile = Vec::with_capacity(cfg.grid.len());
    for (hi, path) in paths.iter().enumerate() {
        let meas = component_measures(path, dim)?;
        profile.push(ProfilePoint {
            k: cfg.grid[hi],
            d: distance(&obs, &meas, cfg.p)?,
        });
    }
    let ds: Vec<f64> = profile.iter().map(|p| p.d).collect();
    let best = argmin_first(&ds)
        .ok_or_else(|| Error::numerical("distance profile is entirely NaN", f64::NAN))?;
    let max = ds.iter().copied().fold(0.0, f64::max);
    let min = ds.iter().copied().fold(f64::INFINITY, f64::min);
    let flat_profile = max == 0.0 || (max - min) / max < 1e-3;
    let profile_regularity = if cfg.crn {
        let mut ok = true;
        for w in 0..paths.len().saturating_sub(1) {
            let (a, b) = (&paths[w], &paths[w + 1]);
            let msd =
                a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / (a.len() / dim) as f64;
            let inc = (ds[w + 1] - ds[w]).powi(2);
            // componentwise maximum: each component is bounded by its own mean square
            if inc > msd * (1.0 + 1e-9) + 1e-15 {
                ok = false;
            }
        }
        Some(ok)
    } else {
        None
    };
    Ok(HurstEstimate {
        h_hat: cfg.grid[best],
        profile,
        distance: if dim == 1 {
            format!("wasserstein-{}", cfg.p)
        } else {
            format!("max-componentwise-wasserstein-{}", cfg.p)
        },
        burn_in: burn,
        flat_profile,
        profile_regularity,
    })
}

/// Observations `Y_{kh}`, `k = 0..n-1`, of the SDE with true index `h_true`,
/// solved by fine Euler with `fine` sub-steps per observation step.
#[allow(clippy::too_many_arguments)]
pub fn simulate_observations(
    spec: &DriftSpec,
    h_true: f64,
    obs_step: f64,
    n: usize,
    fine: usize,
    dim: usize,
    seed: u64,
    mode: Normalization,
    tail_tolerance: f64,
    model: &CovarianceModel,
) -> Result<Vec<f64>> {
    if n < 2 || fine == 0 {
        return Err(Error::config(
            "need n >= 2 observations and at least one fine sub-step",
        ));
    }
    let delta = obs_step / fine as f64;
    let horizon = (n - 1) as f64 * obs_step;
    let steps = (n - 1) * fine;
    let t_grid: Vec<f64> = (0..=steps).map(|k| k as f64 * delta).collect();
    let nc = NoiseConfig::new(delta, t_grid[steps])
        .with_dim(dim)
        .with_tail_tolerance(tail_tolerance);
    let layout = Arc::new(NoiseLayout::new(nc, HurstRange::new(h_true, h_true)?)?);
    let sampler = ProjectionSampler::new(layout, &t_grid, &[h_true], mode, model)?;
    let field = sampler.sample(seed);
    let path = solve_reference(
        &field,
        spec,
        &vec![0.0; dim],
        delta,
        obs_step,
        horizon,
        false,
    )?;
    Ok(path.trajectory(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::new(v.to_vec()).unwrap()
    }

    #[test]
    fn wasserstein_examples() {
        let a = m(&[0.3, -1.0, 2.0]);
        assert_eq!(wasserstein_1d(&a, &a, 2).unwrap(), 0.0);
        assert_eq!(wasserstein_1d(&m(&[0.0]), &m(&[1.0]), 2).unwrap(), 1.0);
        assert_eq!(
            wasserstein_1d(&m(&[0.0, 2.0]), &m(&[1.0, 1.0]), 2).unwrap(),
            1.0
        );
        // unequal sizes: quantiles 0 on (0,1/2], 1 on (1/2,1] against 0,0.5,1 thirds
        let d = wasserstein_1d(&m(&[0.0, 1.0]), &m(&[0.0, 0.5, 1.0]), 1).unwrap();
        assert!((d - 0.5 * (1.0 / 6.0) * 2.0).abs() < 1e-15);
        assert!(EmpiricalMeasure::new(vec![]).is_err());
        assert!(wasserstein_1d(&a, &a, 3).is_err());
    }

    #[test]
    fn argmin_ties_go_first() {
        assert_eq!(argmin_first(&[0.5, 0.2, 0.4]), Some(1));
        assert_eq!(argmin_first(&[0.1, 0.3, 0.1]), Some(0));
    }

    #[test]
    fn grid_parsing() {
        let g = EstimatorConfig::parse_grid("0.30:0.05:0.95").unwrap();
        assert_eq!(g.len(), 14);
        assert_eq!(g[0], 0.3);
        assert_eq!(g[13], 0.95);
        assert!(EstimatorConfig::parse_grid("0.3:0:1").is_err());
    }
}
