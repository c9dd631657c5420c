//! Seeded random number helpers.
//!
//! Every randomized operation in the crate goes through this module so the
//! algorithms are pinned: ChaCha8 as the generator, 53-bit uniforms,
//! Fisher-Yates shuffles, and Box-Muller normals. Identical seeds give
//! identical results on every platform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// 64-bit finalizer from splitmix64; used to derive independent sub-seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a hash of a tag string, for labelling RNG streams.
fn fnv1a(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// RNG for an independent named stream of a master seed.
///
/// `stream(seed, "boot", i)` and `stream(seed, "perm", i)` never collide, so
/// adding a consumer of randomness cannot shift the values seen by another.
pub fn stream(seed: u64, tag: &str, index: u64) -> Rng {
    let mixed = splitmix64(seed ^ fnv1a(tag)).wrapping_add(splitmix64(index));
    Rng::seed_from_u64(splitmix64(mixed))
}

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Uniform integer in `[0, bound)`.
///
/// Plain 64-bit reduction; the modulo bias is below 2^-53 for every bound
/// used in this crate.
pub fn index(rng: &mut Rng, bound: usize) -> usize {
    debug_assert!(bound > 0);
    (rng.next_u64() % bound as u64) as usize
}

/// Uniform f64 in `[0, 1)` with 53 random bits.
pub fn uniform01(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T>(rng: &mut Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Seeded permutation of `0..n`.
pub fn permutation(rng: &mut Rng, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    shuffle(rng, &mut idx);
    idx
}

/// `m` distinct indices from `0..n`, returned in ascending order.
///
/// Partial Fisher-Yates; if `m >= n` all indices are returned.
pub fn sample_without_replacement(rng: &mut Rng, n: usize, m: usize) -> Vec<usize> {
    if m >= n {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = i + index(rng, n - i);
        idx.swap(i, j);
    }
    let mut picked = idx[..m].to_vec();
    picked.sort_unstable();
    picked
}

/// `count` standard-normal draws via Box-Muller on 53-bit uniforms.
///
/// Draws are produced in pairs; for odd counts the second member of the final
/// pair is discarded.
pub fn normals(rng: &mut Rng, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        // u1 in (0, 1] so the log is finite.
        let u1 = 1.0 - uniform01(rng);
        let u2 = uniform01(rng);
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        out.push(radius * angle.cos());
        if out.len() < count {
            out.push(radius * angle.sin());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let a1: Vec<u64> = (0..4).map(|_| stream(7, "a", 0).next_u64()).collect();
        let a2: Vec<u64> = (0..4).map(|_| stream(7, "a", 0).next_u64()).collect();
        assert_eq!(a1, a2);
        assert_ne!(stream(7, "a", 0).next_u64(), stream(7, "b", 0).next_u64());
        assert_ne!(stream(7, "a", 0).next_u64(), stream(7, "a", 1).next_u64());
    }

    #[test]
    fn sample_is_sorted_distinct_and_caps_at_n() {
        let mut rng = seeded(3);
        let s = sample_without_replacement(&mut rng, 100, 10);
        assert_eq!(s.len(), 10);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        let all = sample_without_replacement(&mut rng, 5, 50);
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn normals_have_plausible_moments() {
        let mut rng = seeded(11);
        let xs = normals(&mut rng, 20_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}
