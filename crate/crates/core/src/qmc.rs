//! Randomly shifted Kronecker point sets and seed mixing.
//!
//! The additive recurrence `u_k = frac(s + k·α)` with `α_i = φ_d^{-(i+1)}`,
//! where `φ_d` is the real root of `x^{d+1} = x + 1`, gives low-discrepancy
//! points in any dimension. Independent uniform shifts `s` turn it into a
//! randomized rule whose spread across shifts estimates the error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of independent shifts behind every estimate.
pub const SCRAMBLES: usize = 8;

/// SplitMix64 finalizer, used to derive sub-seeds from a base seed.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.rotate_left(29).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn generalized_golden(dim: usize) -> f64 {
    let mut x: f64 = 2.0;
    for _ in 0..64 {
        let f = x.powi(dim as i32 + 1) - x - 1.0;
        let df = (dim as f64 + 1.0) * x.powi(dim as i32) - 1.0;
        x -= f / df;
    }
    x
}

/// Kronecker increments for `dim` coordinates.
pub fn kronecker_alpha(dim: usize) -> Vec<f64> {
    let g = generalized_golden(dim);
    (1..=dim).map(|i| g.powi(-(i as i32))).collect()
}

/// `SCRAMBLES` shifted copies of an `n`-point Kronecker set in `[0,1)^dim`,
/// laid out scramble-major: point `k` of shift `s` is at `s·n + k`.
pub fn shifted_kronecker(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let alpha = kronecker_alpha(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(SCRAMBLES * n);
    for _ in 0..SCRAMBLES {
        let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        for k in 0..n {
            out.push(
                shift
                    .iter()
                    .zip(&alpha)
                    .map(|(s, a)| (s + (k as f64 + 1.0) * a).fract())
                    .collect(),
            );
        }
    }
    out
}

/// Sum by recursive halving; the grouping depends only on the length, so the
/// result is independent of how the terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
