//! Seeded, splittable random streams.
//!
//! Every stream is a ChaCha20 generator (`rand_chacha`) keyed from a 64-bit
//! key through `SeedableRng::seed_from_u64`. The master handle's key is the
//! user seed. A sub-stream for `(label, index)` gets the key
//!
//! ```text
//! splitmix64(key ^ fnv1a64(label) ^ splitmix64(index))
//! ```
//!
//! so child streams depend only on the parent key, never on how many numbers
//! the parent has already produced. Work can therefore be scheduled in any
//! order (or in parallel) without changing results.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

/// Single-owner random stream. Clone it only to replay the same draws.
#[derive(Debug, Clone)]
pub struct RngHandle {
    key: u64,
    rng: ChaCha20Rng,
}

/// Root stream for `seed`.
pub fn seed_rng(seed: u64) -> RngHandle {
    RngHandle::new(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a64(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RngHandle {
    pub fn new(key: u64) -> Self {
        Self {
            key,
            rng: ChaCha20Rng::seed_from_u64(key),
        }
    }

    /// Key this stream was created from.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Independent child stream named by `label` and `index`.
    pub fn split(&self, label: &str, index: u64) -> RngHandle {
        RngHandle::new(splitmix64(self.key ^ fnv1a64(label) ^ splitmix64(index)))
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `+1` with probability `p_plus`, else `-1`.
    #[inline]
    pub fn spin(&mut self, p_plus: f64) -> i8 {
        if self.uniform() < p_plus {
            1
        } else {
            -1
        }
    }

    /// Uniform integer in `0..n`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for k in (1..items.len()).rev() {
            let j = self.below(k + 1);
            items.swap(k, j);
        }
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn same_seed_same_stream() {
        let mut a = seed_rng(7);
        let mut b = seed_rng(7);
        let xs: Vec<u64> = (0..100).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..100).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn different_seeds_differ_early() {
        let mut a = seed_rng(7);
        let mut b = seed_rng(8);
        let differ = (0..10).any(|_| a.standard_normal() != b.standard_normal());
        assert!(differ);
    }

    #[test]
    fn normals_have_zero_mean() {
        let mut r = seed_rng(7);
        let n = 1_000_000;
        let mean = (0..n).map(|_| r.standard_normal()).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean = {mean}");
    }

    #[test]
    fn split_ignores_parent_position() {
        let root = seed_rng(3);
        let mut advanced = root.clone();
        for _ in 0..17 {
            advanced.next_u64();
        }
        let mut c1 = root.split("fields", 4);
        let mut c2 = advanced.split("fields", 4);
        assert_eq!(c1.next_u64(), c2.next_u64());
        let mut c3 = root.split("fields", 5);
        let mut c4 = root.split("other", 4);
        let first = root.split("fields", 4).next_u64();
        assert_ne!(first, c3.next_u64());
        assert_ne!(first, c4.next_u64());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut r = seed_rng(1);
        let mut v: Vec<usize> = (0..50).collect();
        r.shuffle(&mut v);
        let mut s = v.clone();
        s.sort_unstable();
        assert_eq!(s, (0..50).collect::<Vec<_>>());
    }
}
