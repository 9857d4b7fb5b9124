//! Seeded, splittable random-number streams.
//!
//! Algorithm identity (fixed so other implementations can reproduce runs):
//!
//! - Generator: ChaCha8 (counter-based; `rand_chacha::ChaCha8Rng`). The
//!   256-bit key is derived from the 64-bit master seed by four rounds of
//!   SplitMix64, and each logical stream selects a distinct 64-bit ChaCha
//!   stream number, so all streams are independent and individually
//!   seekable.
//! - Stream numbering: `(domain << 56) | index` with `index < 2^56`.
//! - Uniforms: `u64` output mapped to doubles via the top 53 bits,
//!   `(u >> 11) * 2^-53` in `[0, 1)`.
//! - Gaussians: Box-Muller. Each pair of uniforms `(u1, u2)` with
//!   `u1` shifted into `(0, 1]` yields `r*cos(theta)` and `r*sin(theta)`
//!   for `r = sqrt(-2 ln u1)`, `theta = 2 pi u2`; the sine variate is
//!   cached and returned on the next call.
//! - Sample indices: `next_u64() % m` (the modulo bias is below 2^-50 for
//!   the sample counts used here).
//!
//! Cross-language acceptance compares statistics, not bit patterns, but
//! within one implementation every stream is bitwise reproducible.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose tag entering the stream number; keeps the randomness consumed
/// by problem data, initialization, sampling, and index resampling
/// independently reseedable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Problem data generation (matrices, optima, corruption draws).
    Data = 0,
    /// Initial iterate draws.
    Init = 1,
    /// Oracle sampling during optimization.
    Sample = 2,
    /// Index resampling (e.g. randomized iterate selection).
    Resample = 3,
}

const SPLITMIX_GAMMA: u64 = 0x9e3779b97f4a7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// One independent random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    cached_normal: Option<f64>,
}

impl RngStream {
    /// Stream `(domain, index)` under `master_seed`.
    pub fn new(master_seed: u64, domain: StreamDomain, index: u64) -> Self {
        assert!(index < 1 << 56, "stream index out of range");
        let mut key = [0u8; 32];
        let mut state = master_seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(((domain as u64) << 56) | index);
        Self { rng, cached_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform double in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate via Box-Muller (see module docs).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        // shift into (0, 1] so the log never sees zero
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Fills `out` with standard normal variates.
    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.normal();
        }
    }

    /// Uniform index in `0..m`.
    pub fn index(&mut self, m: usize) -> usize {
        debug_assert!(m > 0);
        (self.next_u64() % m as u64) as usize
    }

    /// Uniform point on the unit sphere in `R^n` (normalized Gaussian;
    /// redrawn in the measure-zero event of a zero vector).
    pub fn unit_sphere(&mut self, n: usize) -> Vec<f64> {
        loop {
            let mut v = vec![0.0; n];
            self.fill_normal(&mut v);
            let norm = crate::linalg::norm2(&v);
            if norm > 0.0 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                return v;
            }
        }
    }
}
