use std::sync::OnceLock;

use hurstlab::fou::*;
use hurstlab::regcheck::mean_se;
use hurstlab::*;

fn model() -> &'static CovarianceModel {
    static M: OnceLock<CovarianceModel> = OnceLock::new();
    M.get_or_init(CovarianceModel::default)
}

const U: Normalization = Normalization::UnitVariance;
const TOL: f64 = DEFAULT_FOU_TOLERANCE;

// Moving-average oracle: Ū_t^H = ∫ m_H(t-s) dW_s with
// m_H(τ) = [∫_0^τ e^{-v}(τ^a - (τ-v)^a) dv + τ^a e^{-τ}] / (Γ(a+1) c(H)),
// so r_{H,K}(s) = ∫_0^∞ m_H(τ) m_K(τ+s) dτ, evaluated with mpmath at 20 digits.
const ORACLE: [(f64, f64, f64, f64); 4] = [
    (0.7, 0.3, 2.0, -0.035_610_119_972_627_96),
    (0.6, 0.8, 1.0, 0.416_242_233_453_247_23),
    (0.6, 0.8, 10.0, 0.091_388_184_929_595_02),
    (0.7, 0.7, 0.0, 0.621_084_672_252_152_5),
];

#[test]
fn stationary_covariance_matches_moving_average_oracle() {
    for (h, k, s, expect) in ORACLE {
        let v = stationary_cross_covariance(h, k, s, TOL, model(), U).unwrap();
        assert!(
            (v - expect).abs() < 1e-7,
            "r_({h},{k})({s}) = {v}, oracle {expect}"
        );
    }
}

#[test]
fn stationary_variance_closed_form() {
    // E(Ū_0^H)² = Γ(2H+1)/2 in the unit-variance normalization
    let v = stationary_cross_covariance(0.7, 0.7, 0.0, TOL, model(), U).unwrap();
    let g = statrs::function::gamma::gamma(2.4) / 2.0;
    assert!((v - g).abs() < 1e-7);
}

#[test]
fn covariance_is_stationary_in_time() {
    let base = fou_covariance(0.0, 0.3, 1.5, 0.7, TOL, model(), U).unwrap();
    for t in [1.0, 3.0] {
        let v = fou_covariance(t, 0.3, t + 1.5, 0.7, TOL, model(), U).unwrap();
        assert!((v - base).abs() < 2e-7, "t = {t}: {v} vs {base}");
    }
}

#[test]
fn symmetrized_decay_profile_is_bounded() {
    let p = covariance_decay_profile(0.6, 0.8, &[0.0, 1.0, 5.0, 20.0, 50.0], None, TOL, model())
        .unwrap();
    assert_eq!(p.rows[0].envelope, 1.0);
    let at_one = p.rows[1].ratio;
    assert!(p.rows.iter().skip(1).all(|r| r.ratio <= 10.0 * at_one));
    let mut csv = Vec::new();
    p.write_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv)
        .unwrap()
        .starts_with("s,r,envelope\n"));
}

#[test]
fn sampled_pair_matches_quadrature() {
    let s = FouSampler::new(0.05, 2.0, &[0.3, 0.7], 1, TOL, U, model()).unwrap();
    let n = 4000;
    let prods: Vec<f64> = (0..n)
        .map(|seed| {
            let p = s.sample(seed);
            let (i0, i2) = (0, p.t_grid.len() - 1);
            p.get(i0, 0, 0) * p.get(i2, 1, 0) + p.get(i2, 0, 0) * p.get(i0, 1, 0)
        })
        .collect();
    let (m, se) = mean_se(&prods);
    let sym = StationaryCovariance::new(0.3, 0.7, TOL, U, model())
        .symmetrized(2.0)
        .unwrap();
    assert!(
        (m - sym).abs() < 3.0 * se,
        "MC {m} ± {se} vs quadrature {sym}"
    );
}

#[test]
fn sampling_is_deterministic() {
    let s = FouSampler::new(0.1, 1.0, &[0.5, 0.6], 2, TOL, U, model()).unwrap();
    assert_eq!(s.sample(5), s.sample(5));
    assert!(s.extension() >= required_extension(TOL));
}
