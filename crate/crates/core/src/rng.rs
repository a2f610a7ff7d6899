//! Seeded random stream used everywhere randomness is needed.
//!
//! ChaCha8 has a platform-independent, version-stable output stream, and the
//! derived samplers below (Lemire index sampling, Box-Muller normals) are
//! implemented here rather than pulled from a distributions crate so the
//! sampled values are pinned forever. Reproducibility of trained models
//! depends on this stream never changing.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;

pub struct SeedStream {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Derive an independent stream for a named sub-task. Keeps seeds for
    /// unrelated stages (init, pairing, folds) from colliding.
    pub fn derive(&self, stream: u64) -> Self {
        let mut rng = self.rng.clone();
        rng.set_stream(stream);
        Self {
            rng,
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1), 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform in (0, 1]; safe to feed to a logarithm.
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Unbiased integer in [0, n) via Lemire's multiply-shift rejection.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index: empty range");
        let n = n as u64;
        let mut x = self.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128) * (n as u128);
                low = m as u64;
            }
        }
        let _ = x;
        (m >> 64) as usize
    }

    /// Standard normal via Box-Muller (both branch values consumed).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let radius = math::sqrt(-2.0 * math::ln(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare_normal = Some(radius * math::sin(theta));
        radius * math::cos(theta)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeedStream::new(42);
        let mut b = SeedStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_eq!(a.normal().to_bits(), b.normal().to_bits());
    }

    #[test]
    fn derived_streams_differ() {
        let base = SeedStream::new(42);
        let mut s1 = base.derive(1);
        let mut s2 = base.derive(2);
        assert_ne!(s1.next_u64(), s2.next_u64());
    }

    #[test]
    fn index_stays_in_range_and_covers() {
        let mut rng = SeedStream::new(3);
        let mut seen = [false; 7];
        for _ in 0..500 {
            let i = rng.index(7);
            assert!(i < 7);
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn normal_moments_are_plausible() {
        let mut rng = SeedStream::new(11);
        let n = 20_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.normal();
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}
