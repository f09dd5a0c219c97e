//! Seeded random streams.
//!
//! Every stream is ChaCha8 keyed by `seed` (expanded with the PCG32 scheme of
//! `SeedableRng::seed_from_u64`) with the 64-bit ChaCha stream word set to
//! `stream_id`. Streams with different ids share a key but never overlap, and
//! the output is identical on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn prng_stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Uniform draw from `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform(rng: &mut StreamRng) -> f64 {
    rng.gen::<f64>()
}

/// Uniform draw from `[lo, hi)`.
#[inline]
pub fn uniform_in(rng: &mut StreamRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform(rng)
}

/// A uniformly distributed unit vector in `R^dim`.
pub fn unit_vector(rng: &mut StreamRng, dim: usize) -> Vec<f64> {
    if dim == 2 {
        let angle = std::f64::consts::TAU * uniform(rng);
        return vec![angle.cos(), angle.sin()];
    }
    loop {
        // Rejection from the cube keeps the direction uniform without a normal sampler.
        let v: Vec<f64> = (0..dim).map(|_| uniform_in(rng, -1.0, 1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
