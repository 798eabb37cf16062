//! One PASS/FAIL line per acceptance criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL without failing
//! the target; any other failure exits nonzero.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use hurstlab::estimator::{estimate_hurst, simulate_observations, EstimatorConfig};
use hurstlab::fou::{
    covariance_decay_profile, stationary_cross_covariance, FouSampler, DEFAULT_FOU_TOLERANCE,
};
use hurstlab::regcheck::*;
use hurstlab::rng::GaussianStream;
use hurstlab::sde::{DriftSpec, ErgodicMode};
use hurstlab::wick::{centered_square_product_expansion, mixed_product_expansion};
use hurstlab::*;
use rayon::prelude::*;

const U: Normalization = Normalization::UnitVariance;
const KNOWN_FAILURES: &[usize] = &[8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn brownian_reduction(m: &CovarianceModel) -> Outcome {
    let mut g = GaussianStream::new(2024, 1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (u, v) = (10.0 * g.uniform(), 10.0 * g.uniform());
        let c = m.cross_covariance(u, 0.5, v, 0.5, U).unwrap();
        worst = worst.max((c - u.min(v)).abs());
    }
    outcome(worst < 1e-6, format!("max |error| = {worst:.2e}"))
}

fn increment_scaling(m: &CovarianceModel) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for h in [0.3, 0.7] {
        let s = ExactSampler::new(&[0.1, 1.0, 1.1, 2.0], &[h], 1, U, m).unwrap();
        let paths: Vec<FbmField> = (0..20_000u64)
            .into_par_iter()
            .map(|seed| s.sample(seed))
            .collect();
        // lag 0.1 on [1, 1.1]; lag 1 on [1, 2]
        for (lag, a, b) in [(0.1, 1, 2), (1.0, 1, 3)] {
            let sq: Vec<f64> = paths
                .iter()
                .map(|f| (f.get(b, 0, 0) - f.get(a, 0, 0)).powi(2))
                .collect();
            let (mean, se) = mean_se(&sq);
            let target = f64::powf(lag, 2.0 * h);
            let ok = (mean - target).abs() <= 3.0 * se;
            pass &= ok;
            parts.push(format!(
                "H={h} lag={lag}: {:.2} SE",
                (mean - target).abs() / se
            ));
        }
    }
    outcome(pass, parts.join(", "))
}

fn sampler_cross_validation(m: &CovarianceModel) -> Outcome {
    let ts: Vec<f64> = (1..=8).map(|i| i as f64 * 0.25).collect();
    let hs = [0.3, 0.5, 0.7];
    let layout = Arc::new(
        NoiseLayout::new(
            NoiseConfig::new(1.0 / 128.0, 2.0),
            HurstRange::new(0.3, 0.7).unwrap(),
        )
        .unwrap(),
    );
    let p = ProjectionSampler::new(layout, &ts, &hs, U, m).unwrap();
    let trunc = p.bias().truncation;
    let n = 10_000u64;
    let samples: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|seed| p.sample(seed).values().to_vec())
        .collect();
    let idx = |ti: usize, hi: usize| ti * hs.len() + hi;
    let points: Vec<(usize, usize)> = (0..ts.len())
        .flat_map(|ti| (0..hs.len()).map(move |hi| (ti, hi)))
        .collect();
    let (mut failures, mut worst) = (0, 0.0f64);
    for (a, &(ti, hj)) in points.iter().enumerate() {
        for &(tk, hl) in &points[a..] {
            let prods: Vec<f64> = samples
                .iter()
                .map(|s| s[idx(ti, hj)] * s[idx(tk, hl)])
                .collect();
            let (mean, se) = mean_se(&prods);
            let exact = m
                .cross_covariance(ts[ti], hs[hj], ts[tk], hs[hl], U)
                .unwrap();
            let z = ((mean - exact).abs() - trunc) / se;
            worst = worst.max(z);
            if z > 3.0 {
                failures += 1;
            }
        }
    }
    let total = points.len() * (points.len() + 1) / 2;
    outcome(
        failures == 0,
        format!("{failures}/{total} entries outside 3 SE + {trunc:.1e}; worst {worst:.2} SE"),
    )
}

fn wick_equivalence() -> Outcome {
    let mut g = GaussianStream::new(7, 4);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 2..=5 {
        let c = centered_square_product_expansion(n).unwrap();
        let mx = mixed_product_expansion(n).unwrap();
        for _ in 0..50 {
            let entries: Vec<f64> = (0..n * n).map(|_| g.next_gaussian()).collect();
            let cov = common::equal_diagonal(n, &entries, 0.5 + 2.0 * g.uniform());
            for (lib, oracle) in [
                (c.evaluate(&cov).unwrap(), common::centered_squares(&cov)),
                (mx.evaluate(&cov).unwrap(), common::mixed_squares(&cov)),
            ] {
                worst = worst.max((lib - oracle).abs() / lib.abs().max(oracle.abs()).max(1e-12));
            }
            cases += 1;
        }
    }
    let cov = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.35, 0.35, 1.0]);
    let n2 = centered_square_product_expansion(2)
        .unwrap()
        .evaluate(&cov)
        .unwrap();
    let exact_n2 = n2 == 2.0 * 0.35 * 0.35;
    outcome(
        worst < 1e-10 && exact_n2,
        format!("{cases} matrices, max rel error {worst:.1e}, n=2 exact: {exact_n2}"),
    )
}

fn fou_classical(m: &CovarianceModel) -> Outcome {
    let tol = DEFAULT_FOU_TOLERANCE;
    let q0 = stationary_cross_covariance(0.5, 0.5, 0.0, tol, m, U).unwrap();
    let q1 = stationary_cross_covariance(0.5, 0.5, 1.0, tol, m, U).unwrap();
    let e1 = (-1.0f64).exp() / 2.0;
    let quad_ok = (q0 - 0.5).abs() < 1e-6 && (q1 - e1).abs() < 1e-6;
    let s = FouSampler::new(0.01, 1.0, &[0.5], 1, tol, U, m).unwrap();
    let pairs: Vec<(f64, f64)> = (0..10_000u64)
        .into_par_iter()
        .map(|seed| {
            let p = s.sample(seed);
            let last = p.t_grid.len() - 1;
            let (a, b) = (p.get(last - 100, 0, 0), p.get(last, 0, 0));
            (a * a, a * b)
        })
        .collect();
    let (var, var_se) = mean_se(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let (cov, cov_se) = mean_se(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let (zv, zc) = ((var - 0.5).abs() / var_se, (cov - e1).abs() / cov_se);
    outcome(
        quad_ok && zv <= 3.0 && zc <= 3.0,
        format!(
            "variance {var:.4} ({zv:.2} SE), lag-1 {cov:.4} ({zc:.2} SE), quadrature errors {:.1e} {:.1e}",
            (q0 - 0.5).abs(),
            (q1 - e1).abs()
        ),
    )
}

fn covariance_decay(m: &CovarianceModel) -> Outcome {
    let s_grid = [
        1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0,
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (h, k) in [(0.3, 0.7), (0.6, 0.8)] {
        let r = covariance_decay_check(h, k, &s_grid, h.max(k), DEFAULT_FOU_TOLERANCE, m).unwrap();
        let max = r.ratios.iter().cloned().fold(0.0, f64::max);
        pass &= r.verdict;
        parts.push(format!(
            "({h},{k}): max ratio / ratio at 1 = {:.2}",
            max / r.ratios[0]
        ));
    }
    outcome(pass, parts.join(", "))
}

fn holder_slope(m: &CovarianceModel) -> Outcome {
    let lags = [0.01, 0.03, 0.1, 0.3, 1.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for h in [0.3, 0.5, 0.7] {
        let r = holder_time_exponent(h, &lags, 4000, 31, U, m).unwrap();
        pass &= (r.slope - 2.0 * h).abs() <= 0.05;
        parts.push(format!("H={h}: slope {:.3}", r.slope));
    }
    outcome(pass, parts.join(", "))
}

fn estimator_recovery(m: &CovarianceModel) -> Outcome {
    let spec = DriftSpec::linear(1.0);
    let grid = EstimatorConfig::parse_grid("0.30:0.05:0.95").unwrap();
    let cfg = EstimatorConfig::new(grid, 20_000, 0.05);
    let estimates: Vec<f64> = (0..20u64)
        .map(|rep| {
            let obs = simulate_observations(
                &spec,
                0.7,
                0.05,
                20_000,
                16,
                1,
                1000 + rep,
                U,
                cfg.tail_tolerance,
                m,
            )
            .unwrap();
            estimate_hurst(&obs, 1, &spec, &cfg, 5000 + rep, m)
                .unwrap()
                .h_hat
        })
        .collect();
    let hits = estimates
        .iter()
        .filter(|&&h| (h - 0.7).abs() <= 0.05 + 1e-12)
        .count();
    let shown: Vec<String> = estimates.iter().map(|h| format!("{h:.2}")).collect();
    outcome(
        hits >= 18,
        format!(
            "{hits}/20 within 0.05 (need 18); estimates [{}]",
            shown.join(" ")
        ),
    )
}

fn ergodic_regularity(m: &CovarianceModel) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for mode in [ErgodicMode::Continuous, ErgodicMode::Discrete] {
        let r = ergodic_h_regularity(
            &DriftSpec::linear(1.0),
            0.6,
            &[0.2, 0.1, 0.05],
            100.0,
            0.05,
            20,
            3,
            mode,
            U,
            m,
        )
        .unwrap();
        let ok = r
            .ratios
            .iter()
            .filter(|&&x| x <= 2f64.powf(-0.9) * 2.0)
            .count();
        pass &= r.verdict;
        parts.push(format!(
            "{mode:?}: {ok}/{} ratios within bound",
            r.ratios.len()
        ));
    }
    outcome(pass, parts.join(", "))
}

fn v_decay(m: &CovarianceModel) -> Outcome {
    let t = [1.0, 3.0, 9.0, 19.0, 49.0, 99.0];
    let r = v_moment_decay(0.4, 0.6, 1, &t, 0.05, 1000, 11, U, m).unwrap();
    let lags: Vec<f64> = t.iter().map(|x| x + 1.0).collect();
    let flat = HolderRegression::fit(&lags, &[r.regression.moments[0]; 6]).unwrap();
    let control = decay_check(&flat, 1, 0.6);
    outcome(
        r.report.verdict && !control.verdict,
        format!(
            "slope {:.3} ± {:.3} (threshold {:.3}); constant control rejected: {}",
            r.regression.slope,
            r.regression.slope_se,
            -2.0 / 3.0 + 0.15,
            !control.verdict
        ),
    )
}

fn law_identity(m: &CovarianceModel) -> Outcome {
    let r = law_identity_check(
        &[0.5, 1.0, 2.5],
        &[-1.0, 0.7, 3.0],
        &[(0.3, 0.7), (0.5, 0.5)],
        2e-6,
        U,
        m,
    )
    .unwrap();
    let worst = r.ratios.iter().cloned().fold(0.0, f64::max);
    outcome(
        r.verdict,
        format!("{} points, max gap {worst:.1e}", r.ratios.len()),
    )
}

fn run_outputs(m: &CovarianceModel) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let layout = Arc::new(
        NoiseLayout::new(
            NoiseConfig::new(0.05, 2.0),
            HurstRange::new(0.3, 0.7).unwrap(),
        )
        .unwrap(),
    );
    let t: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let p = ProjectionSampler::new(layout, &t, &[0.3, 0.5, 0.7], U, m).unwrap();
    let mut buf = Vec::new();
    p.sample(77).write_csv(&mut buf).unwrap();
    out.push(buf);
    let s = FouSampler::new(0.1, 2.0, &[0.4, 0.6], 2, DEFAULT_FOU_TOLERANCE, U, m).unwrap();
    let mut buf = Vec::new();
    s.sample(78).write_csv(&mut buf).unwrap();
    out.push(buf);
    let spec = DriftSpec::linear(1.0);
    let cfg = EstimatorConfig::new(vec![0.4, 0.5, 0.6], 500, 0.05);
    let obs =
        simulate_observations(&spec, 0.5, 0.05, 500, 4, 1, 79, U, cfg.tail_tolerance, m).unwrap();
    let est = estimate_hurst(&obs, 1, &spec, &cfg, 80, m).unwrap();
    out.push(serde_json::to_vec(&est).unwrap());
    let r = holder_time_exponent(0.5, &[0.01, 0.1, 0.3, 1.0], 1000, 81, U, m).unwrap();
    let mut buf = Vec::new();
    holder_time_report(0.5, &r, 0.05)
        .write_csv(&mut buf)
        .unwrap();
    out.push(buf);
    out.push(
        serde_json::to_vec(
            &covariance_decay_profile(0.4, 0.6, &[0.0, 1.0, 2.0], None, 1e-8, m).unwrap(),
        )
        .unwrap(),
    );
    out
}

fn determinism(m: &CovarianceModel) -> Outcome {
    let a = run_outputs(m);
    let b = run_outputs(&CovarianceModel::default());
    let same = a == b;
    let bytes: usize = a.iter().map(Vec::len).sum();
    outcome(
        same,
        format!("{} outputs, {bytes} bytes, byte-identical: {same}", a.len()),
    )
}

fn main() {
    let m = CovarianceModel::default();
    type Check<'a> = (usize, &'a str, Duration, Box<dyn Fn() -> Outcome + 'a>);
    let checks: Vec<Check> = vec![
        (
            1,
            "brownian reduction",
            Duration::from_secs(10),
            Box::new(|| brownian_reduction(&m)),
        ),
        (
            2,
            "increment scaling",
            Duration::from_secs(60),
            Box::new(|| increment_scaling(&m)),
        ),
        (
            3,
            "sampler cross-validation",
            Duration::from_secs(300),
            Box::new(|| sampler_cross_validation(&m)),
        ),
        (
            4,
            "wick oracle equivalence",
            Duration::from_secs(30),
            Box::new(wick_equivalence),
        ),
        (
            5,
            "fOU classical reduction",
            Duration::from_secs(120),
            Box::new(|| fou_classical(&m)),
        ),
        (
            6,
            "covariance decay",
            Duration::from_secs(300),
            Box::new(|| covariance_decay(&m)),
        ),
        (
            7,
            "holder slope",
            Duration::from_secs(120),
            Box::new(|| holder_slope(&m)),
        ),
        (
            8,
            "estimator recovery",
            Duration::from_secs(900),
            Box::new(|| estimator_recovery(&m)),
        ),
        (
            9,
            "ergodic holder-in-H",
            Duration::from_secs(600),
            Box::new(|| ergodic_regularity(&m)),
        ),
        (
            10,
            "V-moment decay",
            Duration::from_secs(600),
            Box::new(|| v_decay(&m)),
        ),
        (
            11,
            "law identity",
            Duration::from_secs(60),
            Box::new(|| law_identity(&m)),
        ),
        (
            12,
            "determinism",
            Duration::from_secs(300),
            Box::new(|| determinism(&m)),
        ),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, check) in checks {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= budget;
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && KNOWN_FAILURES.contains(&id) {
            " [known]"
        } else {
            ""
        };
        println!(
            "criterion {id:>2} {tag}{note}: {name} ({:.1}s / {}s): {}",
            elapsed.as_secs_f64(),
            budget.as_secs(),
            o.detail
        );
        if !pass && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
