//! Subcommand bodies. Each one fills its defaults into the settings it was
//! given (so the manifest records the resolved configuration) and writes its
//! outputs through [`Run`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hurstlab::estimator::{estimate_hurst, simulate_observations, EstimatorConfig};
use hurstlab::fbm::DEFAULT_TOLERANCE;
use hurstlab::fou::{covariance_decay_profile, FouSampler, DEFAULT_FOU_TOLERANCE};
use hurstlab::regcheck::{self, BoundCheckReport, HolderMode};
use hurstlab::rng::derive_seed;
use hurstlab::sde::{euler_scheme, solve_reference, validate_drift, DriftSpec, ErgodicMode};
use hurstlab::wick::{
    centered_square_product_expansion_with_budget, mixed_product_expansion_with_budget,
    DEFAULT_SYMBOLIC_BUDGET,
};
use hurstlab::*;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;
use crate::values::{CheckId, Grid, Pairs, SamplerChoice, Switch, WickKind};

type Res<T = ()> = std::result::Result<T, CliError>;

const DRIFT_TRIALS: usize = 2000;
const DRIFT_RADIUS: f64 = 10.0;

/// Output sink and shared state of one invocation.
pub struct Run {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub strict: bool,
    pub model: CovarianceModel,
    pub outputs: Vec<String>,
    pub derived: BTreeMap<String, Value>,
    pub stdout: Vec<String>,
    pub warnings: Vec<String>,
    pub verdict: Option<bool>,
}

impl Run {
    pub fn new(out_dir: PathBuf, seed: u64, strict: bool) -> Self {
        Self {
            out_dir,
            seed,
            strict,
            model: CovarianceModel::default(),
            outputs: Vec::new(),
            derived: BTreeMap::new(),
            stdout: Vec::new(),
            warnings: Vec::new(),
            verdict: None,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Res {
        fs::write(self.path(name), bytes).map_err(|e| {
            CliError::Io(format!("cannot write {}: {e}", self.path(name).display()))
        })?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> hurstlab::Result<()>) -> Res {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Res {
        let mut buf = to_json(v);
        buf.push(b'\n');
        self.write(name, &buf)
    }

    fn derive(&mut self, key: &str, v: impl Serialize) {
        self.derived.insert(
            key.to_string(),
            serde_json::to_value(v).expect("serializable"),
        );
    }

    fn task_seed(&self, task: u64) -> u64 {
        derive_seed(self.seed, task)
    }
}

pub fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec_pretty(v).expect("outputs serialize to JSON")
}

fn req<T: Clone>(v: &Option<T>, flag: &str) -> Res<T> {
    v.clone()
        .ok_or_else(|| CliError::usage(format!("missing required setting --{flag}")))
}

fn def<T: Clone>(v: &mut Option<T>, d: T) -> T {
    v.get_or_insert(d).clone()
}

fn replicate_name(stem: &str, ext: &str, r: usize, n: usize) -> String {
    if n == 1 {
        format!("{stem}.{ext}")
    } else {
        format!("{stem}-{r:03}.{ext}")
    }
}

/// Shortest decimal form, rounded to 10 places: `2.0000000000003` prints as `2`.
pub fn format_value(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn min_spacing(t: &[f64]) -> f64 {
    let mut pts = t.to_vec();
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

fn projection_layout(
    step: f64,
    t_min: f64,
    t_max: f64,
    h: &[f64],
    dim: usize,
    tail: f64,
) -> Res<Arc<NoiseLayout>> {
    let cfg = NoiseConfig::new(step, t_max)
        .with_t_min(t_min.min(0.0))
        .with_dim(dim)
        .with_tail_tolerance(tail);
    Ok(Arc::new(NoiseLayout::new(cfg, HurstRange::spanning(h)?)?))
}

fn drift(s: &str, dim: usize, run: &mut Run) -> Res<DriftSpec> {
    let spec = DriftSpec::parse(s)?;
    if run.strict {
        let report = validate_drift(
            &spec,
            dim,
            DRIFT_TRIALS,
            DRIFT_RADIUS,
            run.task_seed(u64::MAX),
        )?;
        run.derive("drift_check", report);
    }
    run.derive("kappa", spec.kappa);
    run.derive("K", spec.lipschitz);
    run.derive("gamma0", spec.gamma0());
    Ok(spec)
}

pub fn sample_fbm(a: &mut SampleFbmArgs, run: &mut Run) -> Res {
    let t = req(&a.t_grid, "t-grid")?.0;
    let h = def(&mut a.h_grid, Grid(vec![0.5])).0;
    let dim = def(&mut a.dim, 1);
    let sampler = def(&mut a.sampler, SamplerChoice::Projection);
    let mode = def(&mut a.mode, Normalization::UnitVariance);
    let reps = def(&mut a.replicates, 1);
    if t.is_empty() || reps == 0 {
        return Err(CliError::usage(
            "--t-grid and --replicates must be non-empty",
        ));
    }
    let fields: Vec<FbmField> = match sampler {
        SamplerChoice::Projection => {
            let tail = def(&mut a.tail_tolerance, 1e-4);
            let step = def(&mut a.step, min_spacing(&t));
            let t_max = t.iter().copied().fold(0.0, f64::max);
            let t_min = t.iter().copied().fold(0.0, f64::min);
            let layout = projection_layout(step, t_min, t_max, &h, dim, tail)?;
            let p = ProjectionSampler::new(layout, &t, &h, mode, &run.model)?;
            let bias = p.bias();
            run.derive("L", -bias.lower);
            run.derive("truncation_bound", bias.truncation);
            (0..reps)
                .into_par_iter()
                .map(|r| p.sample(derive_seed(run.seed, r as u64)))
                .collect()
        }
        SamplerChoice::Exact => {
            a.step = None;
            a.tail_tolerance = None;
            let s = ExactSampler::new(&t, &h, dim, mode, &run.model)?;
            run.derive("ridge", s.ridge());
            (0..reps)
                .into_par_iter()
                .map(|r| s.sample(derive_seed(run.seed, r as u64)))
                .collect()
        }
    };
    run.derive("quadrature_tolerance", run.model.tolerance());
    for (r, f) in fields.iter().enumerate() {
        run.csv(&replicate_name("field", "csv", r, reps), |w| f.write_csv(w))?;
        let meta = json!({
            "seed": f.seed(),
            "mode": mode,
            "sampler": f.sampler().to_string(),
            "step": a.step,
            "L": run.derived.get("L"),
            "tail_tolerance": a.tail_tolerance,
            "truncation_bound": run.derived.get("truncation_bound"),
            "quadrature_tolerance": run.model.tolerance(),
            "t_grid": f.t_grid(),
            "h_grid": f.h_grid(),
            "dim": f.dim(),
        });
        run.json(&replicate_name("field", "json", r, reps), &meta)?;
    }
    Ok(())
}

pub fn sample_fou(a: &mut SampleFouArgs, run: &mut Run) -> Res {
    let step = def(&mut a.step, 0.05);
    let horizon = def(&mut a.horizon, 10.0);
    let h = def(&mut a.h_grid, Grid(vec![0.5])).0;
    let dim = def(&mut a.dim, 1);
    let tol = def(&mut a.tolerance, DEFAULT_FOU_TOLERANCE);
    let mode = def(&mut a.mode, Normalization::UnitVariance);
    let reps = def(&mut a.replicates, 1);
    let s = FouSampler::new(step, horizon, &h, dim, tol, mode, &run.model)?;
    run.derive("L", s.extension());
    run.derive("truncation_bound", s.field_sampler().bias().truncation);
    let paths: Vec<_> = (0..reps)
        .into_par_iter()
        .map(|r| s.sample(derive_seed(run.seed, r as u64)))
        .collect();
    for (r, p) in paths.iter().enumerate() {
        run.csv(&replicate_name("fou", "csv", r, reps), |w| p.write_csv(w))?;
        let meta = json!({
            "seed": p.seed,
            "mode": mode,
            "step": step,
            "L": s.extension(),
            "tolerance": tol,
            "h_grid": p.h_grid,
            "dim": p.dim,
        });
        run.json(&replicate_name("fou", "json", r, reps), &meta)?;
    }
    Ok(())
}

pub fn fou_cov(a: &mut FouCovArgs, run: &mut Run) -> Res {
    let (h, k) = (req(&a.big_h, "H")?, req(&a.big_k, "K")?);
    let s = def(
        &mut a.s_grid,
        Grid(vec![0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0]),
    )
    .0;
    let tol = def(&mut a.tolerance, DEFAULT_FOU_TOLERANCE);
    let profile = covariance_decay_profile(h, k, &s, a.h_max, tol, &run.model)?;
    run.derive("h_max", a.h_max.unwrap_or(h.max(k)));
    run.csv("fou-cov.csv", |w| profile.write_csv(w))?;
    run.json("fou-cov.json", &profile)?;
    Ok(())
}

pub fn simulate_sde(a: &mut SdeArgs, run: &mut Run) -> Res {
    let dim = def(&mut a.dim, 1);
    let spec = drift(&def(&mut a.drift, "linear:1".into()), dim, run)?;
    let h = def(&mut a.h_grid, Grid(vec![0.5])).0;
    let y0 = def(&mut a.y0, Grid(vec![0.0; dim])).0;
    let delta = def(&mut a.delta, 0.01);
    let out_step = def(&mut a.out_step, 0.1);
    let horizon = def(&mut a.horizon, 10.0);
    let mode = def(&mut a.mode, Normalization::UnitVariance);
    let tail = def(&mut a.tail_tolerance, 1e-4);
    let n = (horizon / delta).round() as usize;
    let t: Vec<f64> = (0..=n).map(|k| k as f64 * delta).collect();
    let layout = projection_layout(delta, 0.0, t[n], &h, dim, tail)?;
    let p = ProjectionSampler::new(layout, &t, &h, mode, &run.model)?;
    run.derive("L", -p.bias().lower);
    run.derive("field_seed", run.task_seed(0));
    let field = p.sample(run.task_seed(0));
    let path = solve_reference(&field, &spec, &y0, delta, out_step, horizon, run.strict)?;
    run.warnings.extend(path.warnings.iter().cloned());
    run.csv("sde.csv", |w| path.write_csv(w))?;
    let meta = json!({
        "drift": spec.id,
        "kappa": spec.kappa,
        "K": spec.lipschitz,
        "gamma0": spec.gamma0(),
        "delta": delta,
        "out_step": out_step,
        "L": -p.bias().lower,
        "seed": run.task_seed(0),
        "warnings": path.warnings,
    });
    run.json("sde.json", &meta)
}

pub fn euler(a: &mut EulerArgs, run: &mut Run) -> Res {
    let dim = def(&mut a.dim, 1);
    let spec = drift(&def(&mut a.drift, "linear:1".into()), dim, run)?;
    let h = def(&mut a.h_grid, Grid(vec![0.5])).0;
    let m0 = def(&mut a.m0, Grid(vec![0.0; dim])).0;
    let gamma = def(&mut a.gamma, 0.05);
    let n = def(&mut a.n, 1000);
    let mode = def(&mut a.mode, Normalization::UnitVariance);
    let tail = def(&mut a.tail_tolerance, 1e-4);
    let t: Vec<f64> = (0..=n).map(|k| k as f64 * gamma).collect();
    let layout = projection_layout(gamma, 0.0, t[n], &h, dim, tail)?;
    let p = ProjectionSampler::new(layout, &t, &h, mode, &run.model)?;
    run.derive("L", -p.bias().lower);
    let field = p.sample(run.task_seed(0));
    let path = euler_scheme(&field, &spec, &m0, gamma, n)?;
    run.csv("euler.csv", |w| path.write_csv(w))?;
    let meta = json!({
        "drift": spec.id,
        "kappa": spec.kappa,
        "K": spec.lipschitz,
        "gamma": gamma,
        "gamma0": spec.gamma0(),
        "L": -p.bias().lower,
        "seed": run.task_seed(0),
    });
    run.json("euler.json", &meta)
}

fn read_observations(path: &Path) -> Res<(Vec<f64>, usize)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("--data: cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    let mut width = None;
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|x| x.trim().parse::<f64>()).collect();
        let row = match row {
            Ok(r) => r,
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(CliError::usage(format!(
                    "--data: line {} is not numeric",
                    i + 1
                )))
            }
        };
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(CliError::usage(format!(
                    "--data: line {} has {} columns, expected {w}",
                    i + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        values.extend(row);
    }
    let width = width.ok_or_else(|| CliError::usage("--data: no observations"))?;
    Ok((values, width))
}

pub fn estimate(a: &mut EstimateArgs, run: &mut Run) -> Res {
    let grid = def(
        &mut a.grid,
        Grid(EstimatorConfig::parse_grid("0.30:0.05:0.95")?),
    )
    .0;
    let p = def(&mut a.p, 2);
    let gamma = def(&mut a.gamma, 0.05);
    let obs_step = def(&mut a.h, 0.05);
    let crn = def(&mut a.crn, Switch::On);
    let drift_id = def(&mut a.drift, "linear:1".into());
    let mode = def(&mut a.mode, Normalization::UnitVariance);
    let tail = def(&mut a.tail_tolerance, 1e-4);
    let (observed, dim) = match a.data.clone() {
        Some(path) => {
            if a.h_true.is_some() || a.fine.is_some() || a.n.is_some() {
                return Err(CliError::usage(
                    "--h-true, --fine and --n describe synthetic data and conflict with --data",
                ));
            }
            let (v, width) = read_observations(&path)?;
            let dim = def(&mut a.dim, width);
            if dim != width {
                return Err(CliError::usage(format!(
                    "--dim {dim} does not match the {width} data columns"
                )));
            }
            (v, dim)
        }
        None => {
            let dim = def(&mut a.dim, 1);
            let n = def(&mut a.n, 2000);
            let h_true = def(&mut a.h_true, 0.7);
            let fine = def(&mut a.fine, 16);
            let spec = DriftSpec::parse(&drift_id)?;
            run.derive("data_seed", run.task_seed(0));
            (
                simulate_observations(
                    &spec,
                    h_true,
                    obs_step,
                    n,
                    fine,
                    dim,
                    run.task_seed(0),
                    mode,
                    tail,
                    &run.model,
                )?,
                dim,
            )
        }
    };
    let spec = drift(&drift_id, dim, run)?;
    let n_obs = observed.len() / dim;
    let big_n = def(&mut a.big_n, n_obs);
    let cfg = EstimatorConfig {
        grid,
        p,
        n_steps: big_n,
        gamma,
        obs_step,
        crn: crn == Switch::On,
        burn_in: a.burn_in,
        tail_tolerance: tail,
        mode,
    };
    run.derive("burn_in", cfg.burn_in_steps(&spec));
    run.derive("estimator_seed", run.task_seed(1));
    let est = estimate_hurst(&observed, dim, &spec, &cfg, run.task_seed(1), &run.model)?;
    run.json("estimate.json", &est)?;
    run.csv("profile.csv", |w| {
        use std::io::Write;
        writeln!(w, "K,d")?;
        for q in &est.profile {
            writeln!(w, "{},{}", q.k, q.d)?;
        }
        Ok(())
    })?;
    if est.flat_profile {
        run.warnings
            .push("distance profile is flat: the data do not identify H on this grid".into());
    }
    run.stdout.push(format!("H_hat = {}", est.h_hat));
    Ok(())
}

fn keys_used(check: CheckId) -> &'static [&'static str] {
    match check {
        CheckId::HolderTime => &["H", "lags", "paths", "half-width", "mode"],
        CheckId::HurstDirection => &["t-grid", "h-pairs", "mode"],
        CheckId::Rectangular => &["t-pairs", "h-pairs", "mode"],
        CheckId::SupH => &["dts", "q", "h-grid", "paths", "mode"],
        CheckId::PathwiseHolder => &[
            "horizon",
            "n-times",
            "h-grid",
            "eps",
            "holder-mode",
            "paths",
            "mode",
        ],
        CheckId::SdeRegularity => &[
            "drift", "H", "deltas", "t-grid", "step", "eps", "paths", "mode",
        ],
        CheckId::ErgodicRegularity => &[
            "drift", "H", "deltas", "horizon", "gamma", "paths", "ergodic", "mode",
        ],
        CheckId::VDecay => &["H", "K", "p", "t-grid", "step", "paths", "mode"],
        CheckId::CovarianceDecay => &["H", "K", "s-grid", "h-max", "tolerance"],
        CheckId::LawIdentity => &["times", "shifts", "h-pairs", "threshold", "mode"],
    }
}

fn grid(s: &str) -> Grid {
    s.parse().expect("built-in default grid")
}

fn pairs(s: &str) -> Pairs {
    s.parse().expect("built-in default pairs")
}

pub fn verify(a: &mut VerifyArgs, run: &mut Run) -> Res {
    let check = req(&a.check, "check")?;
    let used = keys_used(check);
    if let Value::Object(given) = serde_json::to_value(&*a).expect("serializable") {
        for (k, v) in given {
            if !v.is_null() && k != "check" && !used.contains(&k.as_str()) {
                run.warnings
                    .push(format!("--{k} is not used by check {}", check.name()));
            }
        }
    }
    let mode = if used.contains(&"mode") {
        def(&mut a.mode, Normalization::UnitVariance)
    } else {
        Normalization::UnitVariance
    };
    let seed = run.task_seed(0);
    let m = &run.model;
    let mut extra: Option<Value> = None;
    let mut slope = None;
    let report: BoundCheckReport = match check {
        CheckId::HolderTime => {
            let h = def(&mut a.big_h, 0.5);
            let lags = def(&mut a.lags, grid("0.01,0.03,0.1,0.3,1")).0;
            let paths = def(&mut a.paths, 2000);
            let hw = def(&mut a.half_width, 0.05);
            let reg = regcheck::holder_time_exponent(h, &lags, paths, seed, mode, m)?;
            slope = Some(reg.slope);
            extra = Some(serde_json::to_value(&reg).expect("serializable"));
            regcheck::holder_time_report(h, &reg, hw)
        }
        CheckId::HurstDirection => {
            let t = def(&mut a.t_grid, grid("0.5,1,2,5,10")).0;
            let hp = def(&mut a.h_pairs, pairs("0.3:0.35,0.3:0.5,0.5:0.7,0.6:0.8")).0;
            regcheck::hurst_direction_bound(&t, &hp, mode, m)?
        }
        CheckId::Rectangular => {
            let tp = def(&mut a.t_pairs, pairs("0.5:1,1:2,1:5")).0;
            let hp = def(&mut a.h_pairs, pairs("0.3:0.35,0.3:0.5,0.5:0.7,0.6:0.8")).0;
            regcheck::rectangular_bound(&tp, &hp, mode, m)?
        }
        CheckId::SupH => {
            let dts = def(&mut a.dts, grid("0.01,0.1,1,10")).0;
            let q = def(&mut a.q, 2.0);
            let h = def(&mut a.h_grid, grid("0.3:0.05:0.7")).0;
            let paths = def(&mut a.paths, 1000);
            regcheck::sup_h_moment(&dts, q, &h, paths, seed, mode, m)?
        }
        CheckId::PathwiseHolder => {
            let horizon = def(&mut a.horizon, 4.0);
            let n_times = def(&mut a.n_times, 33);
            let h = def(&mut a.h_grid, grid("0.3:0.05:0.7")).0;
            let eps = def(&mut a.eps, 0.1);
            let hm = def(&mut a.holder_mode, HolderMode::Simple);
            let paths = def(&mut a.paths, 100);
            regcheck::pathwise_holder_constant(horizon, n_times, &h, eps, hm, paths, seed, mode, m)?
        }
        CheckId::SdeRegularity => {
            let spec = DriftSpec::parse(&def(&mut a.drift, "linear:1".into()))?;
            let h = def(&mut a.big_h, 0.5);
            let deltas = def(&mut a.deltas, grid("0.2,0.1,0.05")).0;
            let t = def(&mut a.t_grid, grid("1,5,20")).0;
            let step = def(&mut a.step, 0.01);
            let eps = def(&mut a.eps, 0.1);
            let paths = def(&mut a.paths, 400);
            regcheck::sde_h_regularity(&spec, h, &deltas, &t, step, eps, paths, seed, mode, m)?
        }
        CheckId::ErgodicRegularity => {
            let spec = DriftSpec::parse(&def(&mut a.drift, "linear:1".into()))?;
            let h = def(&mut a.big_h, 0.6);
            let deltas = def(&mut a.deltas, grid("0.2,0.1,0.05")).0;
            let horizon = def(&mut a.horizon, 100.0);
            let gamma = def(&mut a.gamma, 0.05);
            let paths = def(&mut a.paths, 20);
            let ergodic = def(&mut a.ergodic, ErgodicMode::Continuous);
            regcheck::ergodic_h_regularity(
                &spec, h, &deltas, horizon, gamma, paths, seed, ergodic, mode, m,
            )?
        }
        CheckId::VDecay => {
            let h = def(&mut a.big_h, 0.4);
            let k = def(&mut a.big_k, 0.6);
            let p = def(&mut a.p, 1);
            let t = def(&mut a.t_grid, grid("1,3,9,19,49,99")).0;
            let step = def(&mut a.step, 0.05);
            let paths = def(&mut a.paths, 1000);
            let v = regcheck::v_moment_decay(h, k, p, &t, step, paths, seed, mode, m)?;
            slope = Some(v.regression.slope);
            extra = Some(json!({ "regression": v.regression, "centering": v.centering }));
            v.report
        }
        CheckId::CovarianceDecay => {
            let h = def(&mut a.big_h, 0.3);
            let k = def(&mut a.big_k, 0.7);
            let s = def(&mut a.s_grid, grid("1,2,5,10,20,50")).0;
            let h_max = def(&mut a.h_max, h.max(k));
            let tol = def(&mut a.tolerance, DEFAULT_FOU_TOLERANCE);
            regcheck::covariance_decay_check(h, k, &s, h_max, tol, m)?
        }
        CheckId::LawIdentity => {
            let times = def(&mut a.times, grid("0.5,1,2.5")).0;
            let shifts = def(&mut a.shifts, grid("-1,0.7,3")).0;
            let hp = def(&mut a.h_pairs, pairs("0.3:0.7,0.5:0.5")).0;
            let thr = def(&mut a.threshold, 2e-6);
            regcheck::law_identity_check(&times, &shifts, &hp, thr, mode, m)?
        }
    };
    run.derive("check_seed", seed);
    run.json("report.json", &report)?;
    run.csv("ratios.csv", |w| report.write_csv(w))?;
    if let Some(v) = extra {
        run.json("regression.json", &v)?;
    }
    let mut line = format!(
        "{}: {}",
        check.name(),
        if report.verdict { "PASS" } else { "FAIL" }
    );
    if let Some(s) = slope {
        line.push_str(&format!(" (slope {s:.4})"));
    }
    run.stdout.push(line);
    run.verdict = Some(report.verdict);
    Ok(())
}

pub fn wick(a: &mut WickArgs, run: &mut Run) -> Res {
    let n = req(&a.n, "n")?;
    let kind = def(&mut a.kind, WickKind::Centered);
    let budget = def(&mut a.budget, DEFAULT_SYMBOLIC_BUDGET);
    let e = match kind {
        WickKind::Centered => centered_square_product_expansion_with_budget(n, budget)?,
        WickKind::Mixed => mixed_product_expansion_with_budget(n, budget)?,
    };
    run.json("wick.json", &e)?;
    run.stdout
        .push(String::from_utf8(to_json(&e)).expect("JSON is UTF-8"));
    Ok(())
}

pub fn covariance(a: &mut CovarianceArgs, run: &mut Run) -> Res {
    let (u, v) = (req(&a.u, "u")?, req(&a.v, "v")?);
    let (h, k) = (req(&a.big_h, "H")?, req(&a.big_k, "K")?);
    let mode = def(&mut a.mode, Normalization::UnitVariance);
    let tol = def(&mut a.tolerance, DEFAULT_TOLERANCE);
    run.model = CovarianceModel::new(tol);
    let value = run.model.cross_covariance(u, h, v, k, mode)?;
    run.json(
        "covariance.json",
        &json!({ "u": u, "v": v, "H": h, "K": k, "mode": mode, "value": value }),
    )?;
    run.stdout.push(format_value(value));
    Ok(())
}
