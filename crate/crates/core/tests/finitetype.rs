use ftrlab_core::finitetype::*;
use proptest::prelude::*;

const CORPUS: &str = include_str!("data/phases.txt");

struct Entry {
    record: PhaseRecord,
    order: usize,
}

fn corpus() -> Vec<Entry> {
    let records = parse_phase_corpus(CORPUS).unwrap();
    let orders: Vec<usize> = CORPUS
        .lines()
        .filter_map(|l| l.split("# type").nth(1))
        .map(|s| s.trim().parse().unwrap())
        .collect();
    assert_eq!(records.len(), 20);
    assert_eq!(orders.len(), 20);
    records.into_iter().zip(orders).map(|(record, order)| Entry { record, order }).collect()
}

/// The record's function evaluated without the library: the listed
/// polynomial, or the tagged closed form scaled to the leading coefficient.
fn reference(r: &PhaseRecord, t: f64) -> f64 {
    match r.tag {
        None => r.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
        Some(PhaseKind::Cubic) => r.coeffs[3] * t.powi(3),
        Some(PhaseKind::Quartic) => r.coeffs[4] * t.powi(4),
        Some(PhaseKind::SinMinusLinear) => -6.0 * r.coeffs[3] * (t.sin() - t),
        Some(PhaseKind::CosMinusOne) => -2.0 * r.coeffs[2] * (t.cos() - 1.0),
    }
}

#[test]
fn corpus_orders_match_scaling_oracle() {
    // φ(2h)/φ(h) → 2^n as h → 0
    for e in corpus() {
        let h = 1e-3;
        let ratio = reference(&e.record, 2.0 * h) / reference(&e.record, h);
        assert_eq!(ratio.log2().round() as usize, e.order, "{}", e.record.name);
        let phase = e.record.to_phase(symmetric_interval()).unwrap();
        assert_eq!(classify_finite_type(&phase, 16), Some(e.order), "{}", e.record.name);
    }
}

#[test]
fn phases_evaluate_like_their_records() {
    for e in corpus() {
        let phase = e.record.to_phase(symmetric_interval()).unwrap();
        for t in [-1.0, -0.37, 0.0, 0.2, 0.81, 1.0] {
            assert!((phase.eval(t) - reference(&e.record, t)).abs() < 1e-12, "{} at {t}", e.record.name);
        }
    }
}

#[test]
fn normalization_keeps_order() {
    for e in corpus() {
        let phase = e.record.to_phase(symmetric_interval()).unwrap();
        let (normal, record) = normalize_phase(&phase, e.order).unwrap();
        assert_eq!(classify_finite_type(&normal, 16), Some(e.order));
        let lead = normal.derivative(e.order, 0.0);
        assert!((lead - 1.0).abs() < 1e-12, "{}: {lead}", e.record.name);
        assert!((record.undo(normal.eval(0.3)) - phase.eval(0.3)).abs() < 1e-12);
    }
}

#[test]
fn closure_rescale_keeps_order_across_k() {
    for e in corpus() {
        let phase = e.record.to_phase(symmetric_interval()).unwrap();
        for k in [1.0, 8.0, 100.0, 4096.0, 1e5, 1e6] {
            let out = finite_type_closure_rescale(&phase, e.order, k).unwrap();
            assert_eq!(classify_finite_type(&out, 16), Some(e.order), "{} at K = {k}", e.record.name);
            let eta = 0.4;
            let direct = k * reference(&e.record, k.powf(-1.0 / e.order as f64) * eta);
            assert!((out.eval(eta) - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }
}

#[test]
fn rescaled_taylor_data_reproduce_the_phase() {
    for e in corpus().into_iter().filter(|e| e.order == 3) {
        let phase = e.record.to_phase(symmetric_interval()).unwrap();
        for lambda in [0.5, 0.25, 0.125, 0.03] {
            let r = rescale_taylor(&phase, lambda).unwrap();
            for k in 0..=10 {
                let u = k as f64 / 10.0;
                let poly = r.iter().rev().fold(0.0, |acc, c| acc * u + c);
                let direct = lambda.powi(-3) * reference(&e.record, lambda * u + lambda);
                assert!((poly - direct).abs() <= 1e-9, "{} λ = {lambda} u = {u}", e.record.name);
            }
        }
    }
}

#[test]
fn frozen_decomposition_counts() {
    let sq = decompose_square(512.0).unwrap();
    // Ω₀, Ω₃ and three dyadic scales on each axis
    assert_eq!(sq.len(), 8);
    let lam: Vec<f64> = sq.iter().filter_map(|r| r.lambda()).take(3).collect();
    assert_eq!(lam, vec![0.125, 0.25, 0.5]);
    assert!(decompose_square(4.0).is_err());
    let (_, clamped) = dyadic_scales(100.0);
    assert!(clamped);
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|j| (n - j) as f64 / (j + 1) as f64).product()
}

fn total_measure(regions: &[Region]) -> f64 {
    regions.iter().map(Region::measure).sum()
}

fn overlap(a: &Interval, b: &Interval) -> f64 {
    (a.hi.min(b.hi) - a.lo.max(b.lo)).max(0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_bounds_survive_rescaling(
        a3 in 0.5f64..2.0,
        tail in prop::collection::vec(-1.0f64..1.0, 7),
        lambda in 1e-3f64..0.5,
    ) {
        // a₃ ~ 1 and |a_k| ≪ 1/k! for k ≥ 4
        let mut coeffs = vec![0.0, 0.0, 0.0, a3];
        for (i, x) in tail.iter().enumerate() {
            let k = i + 4;
            coeffs.push(1e-3 * x / (1..=k).map(|j| j as f64).product::<f64>());
        }
        let phase = Phase1D::polynomial(&coeffs, symmetric_interval()).unwrap();
        let r = rescale_taylor(&phase, lambda).unwrap();
        for (m, rm) in r.iter().enumerate() {
            if m <= 3 {
                prop_assert!((rm - a3 * binomial(3, m)).abs() <= 0.01);
            } else {
                prop_assert!(rm.abs() <= 0.01);
            }
        }
    }

    #[test]
    fn square_decomposition_partitions(log_k in 3.0f64..20.0) {
        let k = log_k.exp2();
        let regions = decompose_square(k).unwrap();
        prop_assert!((total_measure(&regions) - 1.0).abs() <= 1e-12);
        for (i, a) in regions.iter().enumerate() {
            for b in &regions[i + 1..] {
                let (ra, rb) = (a.rect().unwrap(), b.rect().unwrap());
                prop_assert!(overlap(&ra.u, &rb.u) * overlap(&ra.v, &rb.v) <= 1e-15);
            }
        }
    }

    #[test]
    fn interval_and_mixed_decompositions_partition(log_k in 3.0f64..20.0) {
        let k = log_k.exp2();
        prop_assert!((total_measure(&decompose_interval(k).unwrap()) - 2.0).abs() <= 1e-12);
        prop_assert!((total_measure(&decompose_mixed_square(k).unwrap()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn slabs_tile_their_regions(log_k in 3.0f64..16.0) {
        let k = log_k.exp2();
        for r in decompose_square(k).unwrap().iter().filter(|r| r.lambda().is_some()) {
            let slabs = slab_cover(r, k, SlabKind::SurfaceTau).unwrap();
            let sum: f64 = slabs.iter().map(Slab::measure).sum();
            prop_assert!((sum - r.measure()).abs() <= 1e-12);
            prop_assert!(slabs.iter().all(|s| s.rect().unwrap().within(&r.rect().unwrap(), 1e-12)));
        }
        for r in decompose_interval(k).unwrap().iter().filter(|r| r.lambda().is_some()) {
            let sum: f64 = slab_cover(r, k, SlabKind::CurveTheta).unwrap().iter().map(Slab::measure).sum();
            prop_assert!((sum - r.measure()).abs() <= 1e-12);
        }
        let strip = decompose_mixed_square(k).unwrap().into_iter().find(|r| r.label == RegionLabel::TildeOmega1).unwrap();
        let sum: f64 = slab_cover(&strip, k, SlabKind::MixedTau).unwrap().iter().map(Slab::measure).sum();
        prop_assert!((sum - strip.measure()).abs() <= 1e-12);
    }
}
