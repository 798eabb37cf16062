use std::sync::OnceLock;

use hurstlab::regcheck::*;
use hurstlab::sde::{ergodic_mean_sq_diff, DriftSpec, ErgodicMode};
use hurstlab::*;

fn model() -> &'static CovarianceModel {
    static M: OnceLock<CovarianceModel> = OnceLock::new();
    M.get_or_init(CovarianceModel::default)
}

const U: Normalization = Normalization::UnitVariance;

fn roundtrip(r: &BoundCheckReport) {
    let back: BoundCheckReport = serde_json::from_str(&serde_json::to_string(r).unwrap()).unwrap();
    assert_eq!(back.recompute_verdict(), r.verdict);
    assert_eq!(r.recompute_verdict(), r.verdict);
}

#[test]
fn holder_time_examples() {
    let lags = [0.01, 0.03, 0.1, 0.3, 1.0];
    for (h, target) in [(0.5, 1.0), (0.3, 0.6)] {
        let r = holder_time_exponent(h, &lags, 2000, 17, U, model()).unwrap();
        assert!((r.slope - target).abs() < 0.05, "H={h}: slope {}", r.slope);
        assert!(r.slope_se > 0.0);
        roundtrip(&holder_time_report(h, &r, 0.05));
    }
    assert!(holder_time_exponent(0.5, &[0.1, 0.2, 0.3, 0.4], 2000, 1, U, model()).is_err());
    assert!(holder_time_exponent(0.5, &lags, 10, 1, U, model()).is_err());
}

#[test]
fn hurst_direction_examples() {
    let r =
        hurst_direction_bound(&[0.5, 1.0, 10.0], &[(0.3, 0.3), (0.3, 0.35)], U, model()).unwrap();
    assert_eq!(&r.ratios[..3], &[0.0, 0.0, 0.0]);
    // t = 1 row: the bound is |H - H'|²
    let s = model()
        .increment_second_moment(1.0, 0.3, 1.0, 0.35, U)
        .unwrap();
    assert!((r.ratios[4] - s / 0.05f64.powi(2)).abs() < 1e-9);
    assert!(r.ratios[5].is_finite() && r.ratios[5] > 0.0);
    assert_eq!(r.calibrated_constant, r.ratios[4]);
    assert!(r.verdict);
    roundtrip(&r);
}

#[test]
fn rectangular_examples() {
    let r = rectangular_bound(
        &[(1.0, 1.0), (0.5, 1.0), (1.0, 3.0)],
        &[(0.4, 0.4), (0.4, 0.6)],
        U,
        model(),
    )
    .unwrap();
    assert!(r.ratios[..4].iter().all(|&x| x == 0.0));
    assert!(r.ratios[4].is_finite() && r.ratios[4] > 0.0);
    assert!(r.verdict);
    roundtrip(&r);
}

#[test]
fn sup_h_examples() {
    let dts = [0.01, 0.1, 1.0, 10.0];
    let one = sup_h_moment(&dts, 2.0, &[0.5], 2000, 3, U, model()).unwrap();
    for (r, se) in one.ratios.iter().zip(&one.standard_errors) {
        assert!((r - 1.0).abs() < 3.0 * se, "{r} ± {se}");
    }
    let hs: Vec<f64> = (0..16).map(|i| 0.3 + 0.4 * i as f64 / 15.0).collect();
    let r = sup_h_moment(&[0.0, 0.01, 0.1, 1.0, 10.0], 2.0, &hs, 1000, 4, U, model()).unwrap();
    assert_eq!(r.statistics[0], 0.0);
    assert!(r.verdict);
    roundtrip(&r);
}

#[test]
fn pathwise_constant_report() {
    let hs: Vec<f64> = (0..8).map(|i| 0.3 + 0.4 * i as f64 / 7.0).collect();
    let r =
        pathwise_holder_constant(2.0, 32, &hs, 0.1, HolderMode::Simple, 40, 8, U, model()).unwrap();
    assert_eq!(r.ratios.len(), 80);
    assert!(r.details.contains_key("q90_2T"));
    roundtrip(&r);
    assert!(
        pathwise_holder_constant(2.0, 16, &hs, 0.1, HolderMode::Simple, 40, 8, U, model()).is_err()
    );
}

#[test]
fn sde_regularity_and_expansive_control() {
    let deltas = [0.2, 0.1, 0.05];
    let t = [1.0, 5.0, 10.0];
    let r = sde_h_regularity(
        &DriftSpec::linear(1.0),
        0.5,
        &deltas,
        &t,
        0.02,
        0.1,
        200,
        2,
        U,
        model(),
    )
    .unwrap();
    assert!(r.verdict, "{:?}", r.ratios);
    roundtrip(&r);
    let expansive = DriftSpec::new("expansive", 1.0, 1.0, |x: &[f64], o: &mut [f64]| {
        o.copy_from_slice(x)
    });
    let bad =
        sde_h_regularity(&expansive, 0.5, &deltas, &t, 0.02, 0.1, 200, 2, U, model()).unwrap();
    assert!(!bad.verdict);
    assert!(sde_h_regularity(
        &DriftSpec::linear(1.0),
        0.5,
        &[0.0],
        &t,
        0.02,
        0.1,
        10,
        2,
        U,
        model()
    )
    .is_err());
}

#[test]
fn zero_drift_reduces_to_hurst_direction() {
    let r = sde_h_regularity(
        &DriftSpec::zero(),
        0.5,
        &[0.2],
        &[1.0],
        0.05,
        0.1,
        2000,
        6,
        U,
        model(),
    )
    .unwrap();
    let exact = model()
        .increment_second_moment(1.0, 0.5, 1.0, 0.7, U)
        .unwrap()
        / 0.04;
    assert!(
        (r.ratios[0] - exact).abs() < 3.0 * r.standard_errors[0] + 0.02 * exact,
        "{} vs {exact}",
        r.ratios[0]
    );
}

#[test]
fn ergodic_regularity_and_controls() {
    for mode in [ErgodicMode::Continuous, ErgodicMode::Discrete] {
        let r = ergodic_h_regularity(
            &DriftSpec::linear(1.0),
            0.6,
            &[0.2, 0.1, 0.05],
            20.0,
            0.05,
            20,
            1,
            mode,
            U,
            model(),
        )
        .unwrap();
        assert!(r.verdict);
        roundtrip(&r);
    }
    let t: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let a: Vec<f64> = t.iter().map(|x| x.sin()).collect();
    let s = ergodic_mean_sq_diff(&t, &a, &a, 1, ErgodicMode::Continuous, None).unwrap();
    assert!(s.values.iter().all(|&v| v == 0.0));
    let synthetic: Vec<f64> = [0.2f64, 0.1, 0.05]
        .iter()
        .map(|d| 3.0 * d.powf(0.9))
        .collect();
    for r in halving_ratios(&synthetic) {
        assert!((r - 2f64.powf(-0.9)).abs() < 1e-12);
    }
    // R growing as δ shrinks violates the halving rule
    let rule = VerdictRule::GroupFractionAtMost {
        group: 2,
        threshold: 2f64.powf(-0.9) * 2.0,
        min_fraction: 0.9,
    };
    assert!(!rule.evaluate(&halving_ratios(&[1.0, 2.0, 4.0]), &[0.0, 0.0]));
    assert!(ergodic_h_regularity(
        &DriftSpec::linear(1.0),
        0.6,
        &[0.2, 0.1],
        20.0,
        0.6,
        4,
        1,
        ErgodicMode::Discrete,
        U,
        model()
    )
    .is_err());
}

#[test]
fn v_decay_and_negative_control() {
    let t = [1.0, 3.0, 9.0, 19.0, 49.0];
    let r = v_moment_decay(0.4, 0.6, 1, &t, 0.1, 1000, 12, U, model()).unwrap();
    assert!(r.report.verdict, "slope {}", r.regression.slope);
    roundtrip(&r.report);
    let lags: Vec<f64> = t.iter().map(|x| x + 1.0).collect();
    let flat = HolderRegression::fit(&lags, &[0.01; 5]).unwrap();
    assert!(!decay_check(&flat, 1, 0.6).verdict);
    assert!(v_moment_decay(0.5, 0.5, 1, &t, 0.1, 1000, 12, U, model()).is_err());
}

#[test]
fn law_identity_report() {
    let r = law_identity_check(&[0.5, 2.0], &[-1.0, 3.0], &[(0.3, 0.7)], 2e-6, U, model()).unwrap();
    assert!(r.verdict);
    roundtrip(&r);
}

#[test]
fn bounded_rule_negative_control() {
    let rule = VerdictRule::BoundedByReference {
        reference: 0,
        factor: 10.0,
        se_margin: 0.0,
    };
    assert!(!rule.evaluate(&[1.0, 11.0], &[0.0, 0.0]));
}
