//! Fractional Brownian motion as a Gaussian field in (time, Hurst index),
//! together with fractional Ornstein–Uhlenbeck processes, Euler schemes for
//! dissipative SDEs driven by the field, a Wasserstein grid-argmin Hurst
//! estimator, Gaussian moment combinatorics and Monte Carlo bound checks.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cheb;
pub mod error;
pub mod estimator;
pub mod fbm;
pub mod fou;
pub mod quad;
pub mod regcheck;
pub mod rng;
pub mod sde;
pub mod wick;

pub use error::{Error, Result};
pub use fbm::{
    sample_field_exact, sample_field_mvn, CovarianceModel, ExactSampler, FbmField, HurstRange,
    NoiseConfig, NoiseLayout, Normalization, ProjectionSampler, SamplerKind, WhiteNoiseGrid,
};
