use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

/// Deterministic random stream keyed by `(master seed, realization, purpose)`.
///
/// The key is hashed into a ChaCha8 seed, so streams with different
/// realization indices or purpose labels are independent and every stream is
/// reproducible across runs and platforms.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

pub fn stream_for(master_seed: u64, realization: u64, purpose: &str) -> RngStream {
    let mut h = Sha256::new();
    h.update(b"uwa-channel/rng/v1");
    h.update(master_seed.to_le_bytes());
    h.update(realization.to_le_bytes());
    h.update((purpose.len() as u64).to_le_bytes());
    h.update(purpose.as_bytes());
    let seed: [u8; 32] = h.finalize().into();
    RngStream {
        rng: ChaCha8Rng::from_seed(seed),
    }
}

impl RngStream {
    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform draw in `[lo, hi]`; returns `lo` when the range is empty.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform angle in `[0, 2π)`.
    pub fn angle(&mut self) -> f64 {
        let a = std::f64::consts::TAU * self.uniform();
        if a >= std::f64::consts::TAU {
            0.0
        } else {
            a
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn normal(&mut self, mean: f64, sigma: f64) -> f64 {
        mean + sigma * self.standard_normal()
    }
}
