//! Deterministic random streams.
//!
//! Every stochastic operation takes an explicit `(seed, stream)` pair. The
//! generator is ChaCha8 keyed by the little-endian bytes of the 64-bit seed
//! (remaining key bytes zero) with the ChaCha stream id set to `stream`, so
//! distinct `(seed, stream)` pairs never share a keystream. Gaussian draws use
//! the Box–Muller transform on 53-bit uniforms in (0, 1].

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Number of sub-streams reserved per task index by [`task_stream`].
pub const SUBSTREAMS_PER_TASK: u64 = 256;

/// Stream id for sub-stream `sub` of task `task`: `task * 256 + sub`.
///
/// Injective as long as `sub < 256`.
pub fn task_stream(task: u64, sub: u64) -> u64 {
    debug_assert!(sub < SUBSTREAMS_PER_TASK);
    task.wrapping_mul(SUBSTREAMS_PER_TASK).wrapping_add(sub)
}

/// Seed for task `task` derived from a master seed:
/// `master XOR splitmix64(task)`, injective in `task` for a fixed master.
pub fn derive_seed(master: u64, task: u64) -> u64 {
    master ^ splitmix64(task)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Build the ChaCha8 generator for a `(seed, stream)` pair.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Standard normal draws via Box–Muller.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            rng: stream_rng(seed, stream),
            spare: None,
        }
    }

    /// Uniform in (0, 1].
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64], scale: f64) {
        for x in out.iter_mut() {
            *x = scale * self.next_gaussian();
        }
    }
}
