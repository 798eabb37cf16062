//! The fractional Brownian field `(t, H) ↦ B_t^H`.

pub mod covariance;
pub mod field;
pub mod kernel;
pub mod noise;
pub mod sampler;

pub use covariance::{raw_cross_covariance, CovarianceModel, Normalization, DEFAULT_TOLERANCE};
pub use field::{FbmField, SamplerKind};
pub use kernel::{kernel_k1, kernel_k2, normalization_constant, HurstRange};
pub use noise::{tail_variance, NoiseConfig, NoiseLayout, WhiteNoiseGrid};
pub use sampler::{
    sample_field_exact, sample_field_mvn, ExactSampler, ProjectionBias, ProjectionSampler,
};
