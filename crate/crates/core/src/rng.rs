//! Deterministic, splittable randomness.
//!
//! Every randomized stage of the library draws from an [`RngStream`] keyed by
//! a `(master_seed, stream_path)` pair. Identical keys yield identical byte
//! streams on every platform and under every thread schedule; distinct paths
//! yield independent streams. This is what makes whole runs reproducible even
//! when rounds execute concurrently: each round derives its own substream
//! instead of sharing a sequential generator.
//!
//! The stream core is ChaCha8 (keyed by the master seed, with the hashed path
//! as the stream number). Gaussian and bounded-integer sampling are done
//! in-crate (Box-Muller, Lemire reduction) so that the byte-to-value mapping
//! is pinned by this crate alone.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a new 64-bit seed from `seed` and `tag`.
///
/// Used to give independent master seeds to e.g. successive restart
/// iterations of the parameter-free engines.
#[inline]
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_add(GOLDEN)))
}

fn path_stream_id(path: &[u64]) -> u64 {
    // pi fractional bits, an arbitrary non-zero start
    let mut h = 0x243F_6A88_85A3_08D3;
    for &e in path {
        h = derive_seed(h, e);
    }
    h
}

/// A deterministic random stream identified by `(master_seed, stream_path)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    chacha: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    /// Opens the stream for `master_seed` at the given derivation path.
    pub fn new(master_seed: u64, stream_path: &[u64]) -> Self {
        let mut chacha = ChaCha8Rng::seed_from_u64(master_seed);
        chacha.set_stream(path_stream_id(stream_path));
        Self {
            chacha,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.chacha.next_u64()
    }

    /// Uniform f64 in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn unit_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Standard normal deviate (Box-Muller; second deviate cached).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        const SCALE: f64 = 1.0 / 9_007_199_254_740_992.0;
        // u1 in (0, 1] so the logarithm is finite.
        let u1 = ((self.next_u64() >> 11) as f64 + 1.0) * SCALE;
        let u2 = (self.next_u64() >> 11) as f64 * SCALE;
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    /// Uniform index in `0..n` (unbiased Lemire reduction).
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        let n = n as u64;
        let mut x = self.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut lo = m as u64;
        if lo < n {
            let t = n.wrapping_neg() % n;
            while lo < t {
                x = self.next_u64();
                m = (x as u128) * (n as u128);
                lo = m as u64;
            }
        }
        (m >> 64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_stream() {
        let mut a = RngStream::new(42, &[3, 1]);
        let mut b = RngStream::new(42, &[3, 1]);
        for _ in 0..64 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_paths_differ() {
        let mut a = RngStream::new(42, &[3, 1]);
        let mut b = RngStream::new(42, &[3, 2]);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn index_is_in_range_and_covers() {
        let mut rng = RngStream::new(7, &[]);
        let mut seen = [false; 5];
        for _ in 0..1000 {
            let i = rng.index(5);
            assert!(i < 5);
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn normal_moments_are_sane() {
        let mut rng = RngStream::new(11, &[9]);
        let n = 200_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.standard_normal();
            sum += z;
            sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn unit_f64_range() {
        let mut rng = RngStream::new(3, &[]);
        for _ in 0..1000 {
            let u = rng.unit_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
