//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use ftrlab_core::lattice::{LatticeField, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `J_n(x)` by its power series; fine for `|x| ≲ 20`.
pub fn bessel_series(n: i64, x: f64) -> f64 {
    let m = n.unsigned_abs() as i32;
    let half = 0.5 * x;
    let mut term = half.powi(m) / (1..=m).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= -half * half / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    if n < 0 && m % 2 == 1 {
        -sum
    } else {
        sum
    }
}

/// `J_0 … J_{n_max}` at `x > 0` by Miller's backward recurrence normalized
/// with `J_0 + 2Σ J_{2k} = 1`; valid for any `x`.
pub fn bessel_table(n_max: usize, x: f64) -> Vec<f64> {
    let start = (n_max.max(x as usize) + 60 + (x.sqrt() * 10.0) as usize) | 1;
    let mut vals = vec![0.0; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    vals.truncate(n_max + 1);
    vals.iter().map(|v| v / norm).collect()
}

/// `e^{-2it} i^n J_n(2t)`, the lattice fundamental solution in d = 1.
pub fn fundamental_solution(n: i64, t: f64) -> C64 {
    let i_pow = match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    C64::from_polar(1.0, -2.0 * t) * i_pow * bessel_series(n, 2.0 * t)
}

pub fn random_field(dim: usize, radius: usize, support: i64, seed: u64) -> LatticeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = LatticeField::zeros(dim, radius).unwrap();
    let values = (0..zero.len())
        .map(|i| {
            let c = zero.coords(i);
            let z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            if c[..dim].iter().all(|x| x.abs() <= support) {
                z
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    LatticeField::from_values(dim, radius, values).unwrap()
}

/// `Σ_x u(x) e^{-ix·ξ}` summed directly.
pub fn direct_dft(u: &LatticeField, xi: &[f64]) -> C64 {
    u.values()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let c = u.coords(i);
            let phase: f64 = (0..u.dim()).map(|a| c[a] as f64 * xi[a]).sum();
            z * C64::from_polar(1.0, -phase)
        })
        .sum()
}

/// Composite Simpson on `[a, b]` with `n` (even) intervals.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> C64) -> C64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + k as f64 * h) * w;
    }
    acc * (h / 3.0)
}

pub fn rel_diff(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}
