use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hurstlab::estimator::{wasserstein_1d, EmpiricalMeasure};
use hurstlab::fou::stationary_cross_covariance;
use hurstlab::rng::GaussianStream;
use hurstlab::sde::{euler_scheme, DriftSpec};
use hurstlab::wick::centered_square_product_expansion;
use hurstlab::*;

const U: Normalization = Normalization::UnitVariance;

fn covariance(c: &mut Criterion) {
    c.bench_function("cross_covariance/uncached", |b| {
        b.iter_batched(
            CovarianceModel::default,
            |m| {
                m.cross_covariance(black_box(1.3), 0.3, black_box(2.1), 0.7, U)
                    .unwrap()
            },
            BatchSize::SmallInput,
        )
    });
    let m = CovarianceModel::default();
    m.cross_covariance(1.3, 0.3, 2.1, 0.7, U).unwrap();
    c.bench_function("cross_covariance/cached", |b| {
        b.iter(|| {
            m.cross_covariance(black_box(1.3), 0.3, black_box(2.1), 0.7, U)
                .unwrap()
        })
    });
}

fn samplers(c: &mut Criterion) {
    let m = CovarianceModel::default();
    let t: Vec<f64> = (0..=1024).map(|k| k as f64 / 256.0).collect();
    let h = [0.3, 0.5, 0.7];
    let layout = Arc::new(
        NoiseLayout::new(
            NoiseConfig::new(1.0 / 256.0, 4.0),
            HurstRange::new(0.3, 0.7).unwrap(),
        )
        .unwrap(),
    );
    let p = ProjectionSampler::new(layout, &t, &h, U, &m).unwrap();
    let mut seed = 0;
    c.bench_function("projection/1025x3", |b| {
        b.iter(|| {
            seed += 1;
            p.sample(seed)
        })
    });
    let te: Vec<f64> = (1..=64).map(|k| k as f64 / 16.0).collect();
    let e = ExactSampler::new(&te, &h, 1, U, &m).unwrap();
    c.bench_function("exact/64x3", |b| {
        b.iter(|| {
            seed += 1;
            e.sample(seed)
        })
    });
}

fn schemes(c: &mut Criterion) {
    let m = CovarianceModel::default();
    let n = 4000;
    let t: Vec<f64> = (0..=n).map(|k| k as f64 * 0.05).collect();
    let layout = Arc::new(
        NoiseLayout::new(
            NoiseConfig::new(0.05, t[n]),
            HurstRange::new(0.6, 0.6).unwrap(),
        )
        .unwrap(),
    );
    let field = ProjectionSampler::new(layout, &t, &[0.6], U, &m)
        .unwrap()
        .sample(1);
    let spec = DriftSpec::linear(1.0);
    c.bench_function("euler/4000", |b| {
        b.iter(|| euler_scheme(&field, &spec, &[0.0], 0.05, n).unwrap())
    });
}

fn distances(c: &mut Criterion) {
    let mut g = GaussianStream::new(5, 0);
    let a = EmpiricalMeasure::new((0..20_000).map(|_| g.next_gaussian()).collect()).unwrap();
    let b = EmpiricalMeasure::new((0..15_000).map(|_| 0.8 * g.next_gaussian()).collect()).unwrap();
    c.bench_function("wasserstein_2/20000x15000", |bch| {
        bch.iter(|| wasserstein_1d(&a, &b, 2).unwrap())
    });
}

fn combinatorics(c: &mut Criterion) {
    c.bench_function("wick/centered_n6", |b| {
        b.iter(|| centered_square_product_expansion(black_box(6)).unwrap())
    });
}

fn fou(c: &mut Criterion) {
    let m = CovarianceModel::default();
    let mut g = c.benchmark_group("fou");
    g.sample_size(10);
    g.bench_function("stationary_cross_covariance", |b| {
        b.iter(|| stationary_cross_covariance(0.4, 0.6, black_box(2.0), 1e-8, &m, U).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    covariance,
    samplers,
    schemes,
    distances,
    combinatorics,
    fou
);
criterion_main!(benches);
