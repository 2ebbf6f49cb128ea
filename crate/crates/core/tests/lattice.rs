mod common;

use common::*;
use ftrlab_core::lattice::*;
use proptest::prelude::*;

#[test]
fn fundamental_solution_matches_bessel_series() {
    let grid = TorusGrid::new(1, 512).unwrap();
    let delta = LatticeField::delta(1, 64, &[0]).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let u = propagate(&delta, t, grid).unwrap();
        let err = (-64..=64).map(|n| (u.get(&[n]) - fundamental_solution(n, t)).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "t = {t}: {err:e}");
    }
}

#[test]
fn miller_recurrence_agrees_with_series() {
    // cross-check of the two Bessel oracles where both apply
    for x in [0.5, 3.0, 9.0] {
        let table = bessel_table(30, x);
        for (n, v) in table.iter().enumerate() {
            assert!((v - bessel_series(n as i64, x)).abs() < 1e-12, "J_{n}({x})");
        }
    }
}

#[test]
fn forward_dft_matches_direct_sum() {
    for (dim, radius, m) in [(1, 7, 16), (1, 12, 32), (2, 3, 8)] {
        let u = random_field(dim, radius, radius as i64, 40 + radius as u64);
        let grid = TorusGrid::new(dim, m).unwrap();
        let v = forward_dft(&u, grid).unwrap();
        for (i, z) in v.values().iter().enumerate() {
            let p = grid.point(i);
            let err = (z - direct_dft(&u, &p[..dim])).norm();
            assert!(err < 1e-12, "node {i}: {err:e}");
        }
    }
}

#[test]
fn frozen_symbol_values() {
    use std::f64::consts::{FRAC_PI_2, PI};
    assert_eq!(symbol_omega(&[0.0]).unwrap(), 0.0);
    assert!((symbol_omega(&[PI]).unwrap() - 4.0).abs() < 1e-15);
    assert!((symbol_omega(&[FRAC_PI_2, FRAC_PI_2]).unwrap() - 4.0).abs() < 1e-14);
    assert!(symbol_omega(&[4.0]).is_err());
}

#[test]
fn propagator_matches_rk4_integration() {
    // i u' = -Δu integrated in time on a window the data never leaves
    let f = random_field(1, 40, 3, 9);
    let t = 0.5;
    let steps = 2000;
    let h = t / steps as f64;
    let rhs = |u: &LatticeField| discrete_laplacian(u).scale(C64::new(0.0, 1.0));
    let mut u = f.clone();
    for _ in 0..steps {
        let k1 = rhs(&u);
        let k2 = rhs(&u.add(&k1.scale(C64::new(0.5 * h, 0.0))).unwrap());
        let k3 = rhs(&u.add(&k2.scale(C64::new(0.5 * h, 0.0))).unwrap());
        let k4 = rhs(&u.add(&k3.scale(C64::new(h, 0.0))).unwrap());
        let incr = k1.add(&k2.scale(C64::new(2.0, 0.0))).unwrap().add(&k3.scale(C64::new(2.0, 0.0))).unwrap().add(&k4).unwrap();
        u = u.add(&incr.scale(C64::new(h / 6.0, 0.0))).unwrap();
    }
    let exact = propagate(&f, t, TorusGrid::for_propagation(1, 40, t).unwrap()).unwrap();
    assert!(exact.sub(&u).unwrap().sup_norm() < 1e-10);
}

#[test]
fn laplacian_is_the_symbol_multiplier() {
    let f = random_field(2, 10, 4, 3);
    let grid = TorusGrid::for_window(2, 10).unwrap();
    let spec = forward_dft(&f, grid).unwrap();
    let omega = grid.omega_table();
    let scaled: Vec<C64> = spec.values().iter().zip(&omega).map(|(z, w)| -z * w).collect();
    let via_symbol = inverse_dft(&TorusFunction::new(grid, scaled).unwrap(), 10).unwrap();
    assert!(via_symbol.sub(&discrete_laplacian(&f)).unwrap().sup_norm() < 1e-12);
}

#[test]
fn coarse_grid_is_rejected() {
    let f = LatticeField::delta(1, 10, &[0]).unwrap();
    assert!(propagate(&f, 3.0, TorusGrid::new(1, 32).unwrap()).is_err());
    assert!(forward_dft(&f, TorusGrid::new(1, 16).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_is_exact(seed in any::<u64>(), dim in 1usize..=2, radius in 1usize..12) {
        let u = random_field(dim, radius, radius as i64, seed);
        let grid = TorusGrid::for_window(dim, radius).unwrap();
        let back = inverse_dft(&forward_dft(&u, grid).unwrap(), radius).unwrap();
        prop_assert!(back.sub(&u).unwrap().sup_norm() <= 1e-12);
    }

    #[test]
    fn propagation_is_unitary(seed in any::<u64>(), t in -6.0f64..6.0, dim in 1usize..=2) {
        let f = random_field(dim, 8, 8, seed);
        let u = propagate(&f, t, TorusGrid::for_propagation(dim, 8, t).unwrap()).unwrap();
        // the window keeps only what stayed inside; measure on a wide one instead
        let wide = f.resize(8 + 2 * t.abs().ceil() as usize + 30);
        let w = propagate(&wide, t, TorusGrid::for_propagation(dim, wide.radius(), t).unwrap()).unwrap();
        prop_assert!((w.norm_l2() - f.norm_l2()).abs() <= 1e-12 * f.norm_l2().max(1.0));
        prop_assert!(u.norm_l2() <= f.norm_l2() * (1.0 + 1e-12));
    }

    #[test]
    fn group_law(seed in any::<u64>(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let f = random_field(1, 40, 4, seed);
        let grid = TorusGrid::new(1, 256).unwrap();
        let two = propagate(&propagate(&f, s, grid).unwrap(), t, grid).unwrap();
        let one = propagate(&f, s + t, grid).unwrap();
        prop_assert!(two.sub(&one).unwrap().sup_norm() <= 1e-10);
    }
}
