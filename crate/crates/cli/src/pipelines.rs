//! Pipelines shared by the experiment runners and the acceptance suite.

use ftrlab_core::analysis::{
    decoupling_check, fit_growth_exponent, parallel_combine_check, restriction_scan, unimodular_slab_data, BallDecoupling,
    BallNormPlan, CombineReport, ConstantEstimate, DecouplingGeometry, DecouplingResult, Geometry, GrowthFit, TestFamily,
};
use ftrlab_core::dnls::DnlsProblem;
use ftrlab_core::extension::SurfaceSpec;
use ftrlab_core::finitetype::{unit_interval, Phase1D, Rect};
use ftrlab_core::lattice::{LatticeField, C64};
use ftrlab_core::qmc::mix_seed;
use ftrlab_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bumps `(center, width, modulation)` of the translation-averaging corpus.
pub const TRANSLATION_CORPUS: [(f64, f64, f64); 10] = [
    (0.0, 0.3, 0.0),
    (0.5, 0.25, 0.0),
    (-0.8, 0.28, 2.0),
    (1.1, 0.25, -3.0),
    (0.0, 0.25, 5.0),
    (0.0, 0.35, 0.0),
    (-1.1, 0.25, 1.0),
    (0.9, 0.27, -2.0),
    (-0.3, 0.32, 4.0),
    (0.2, 0.3, -5.0),
];
pub const TRANSLATION_T: f64 = 4.0;
pub const TRANSLATION_N: usize = 40;

/// Sign of a `±` geometry name.
fn sign_of(name: &str) -> f64 {
    if name.ends_with('-') {
        -1.0
    } else {
        1.0
    }
}

/// Extension geometry by config name: `curve` is `(t, t³)`, `surface±` is
/// `ξ₁³ ± ξ₂³` and `mixed±` is `ξ₁² ± ξ₂³` on the unit square.
pub fn geometry(name: &str) -> Result<Geometry> {
    match name {
        "curve" => Geometry::cubic_curve(),
        "surface+" | "surface-" => Geometry::prototypical_surface(sign_of(name)),
        "mixed+" | "mixed-" => {
            let unit = unit_interval();
            let s = SurfaceSpec::new(Phase1D::monomial(2, unit)?, Phase1D::monomial(3, unit)?, sign_of(name), Rect::unit())?;
            Ok(Geometry::Surface(s))
        }
        _ => Err(Error::Domain(format!("unknown geometry `{name}`"))),
    }
}

pub fn decoupling_geometry(name: &str) -> Result<DecouplingGeometry> {
    match name {
        "curve" => Ok(DecouplingGeometry::CurveTheta),
        "surface+" | "surface-" => Ok(DecouplingGeometry::SurfaceTau { sign: sign_of(name) }),
        "mixed+" | "mixed-" => Ok(DecouplingGeometry::MixedTau { sign: sign_of(name) }),
        _ => Err(Error::Domain(format!("unknown geometry `{name}`"))),
    }
}

/// Initial data of the DNLS experiments, centered at the origin:
///
/// * `delta`: `a δ₀`
/// * `bump`: `a e^{-|x|²/4} e^{0.7 i x₁}`
/// * `pair`: `a (1 + i/3)` at `x = (±2, 0)`
/// * `random`: `a` times uniform values in the square `[-1/2, 1/2]²` on `|x|_∞ ≤ 3`
pub fn initial_field(shape: &str, dim: usize, radius: usize, amplitude: f64, seed: u64) -> Result<LatticeField> {
    let zero = C64::new(0.0, 0.0);
    match shape {
        "delta" => Ok(LatticeField::delta(dim, radius, &vec![0; dim])?.scale(C64::new(amplitude, 0.0))),
        "bump" => LatticeField::from_fn(dim, radius, |x| {
            let r2: f64 = x.iter().map(|&v| (v * v) as f64).sum();
            C64::from_polar(amplitude * (-r2 / 4.0).exp(), 0.7 * x[0] as f64)
        }),
        "pair" => LatticeField::from_fn(dim, radius, |x| {
            if x[0].abs() == 2 && x[1..].iter().all(|&v| v == 0) {
                C64::new(amplitude, amplitude / 3.0)
            } else {
                zero
            }
        }),
        "random" => random_field(dim, radius, 3, amplitude, seed),
        _ => Err(Error::Domain(format!("unknown initial data `{shape}`"))),
    }
}

/// `amplitude` times uniform values in `[-1/2, 1/2]²` on `|x|_∞ ≤ support`.
pub fn random_field(dim: usize, radius: usize, support: usize, amplitude: f64, seed: u64) -> Result<LatticeField> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x1417, 0));
    let shape = LatticeField::zeros(dim, radius)?;
    let values = (0..shape.len())
        .map(|i| {
            let z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * amplitude;
            if shape.coords(i)[..dim].iter().all(|v| v.unsigned_abs() as usize <= support) {
                z
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    LatticeField::from_values(dim, radius, values)
}

/// Horizon, steps and tolerance of the solver cross-validation.
pub const SMALL_DATA_RUN: (f64, usize, f64) = (5.0, 1000, 1e-13);

/// Small-data corpus for the Picard / split-step cross-validation: `d = 1`,
/// window 40, `p = 8`, `q = 2`, amplitudes at most 0.5.
pub fn small_data_corpus() -> Result<Vec<(String, DnlsProblem)>> {
    let cases: [(&str, f64, f64, f64); 4] =
        [("delta", 0.5, 8.0, 1.0), ("delta", 0.3, 8.0, 1.0), ("bump", 0.4, 8.0, -1.0), ("pair", 0.3, 5.0, 1.0)];
    cases
        .iter()
        .map(|&(shape, amp, alpha, mu)| {
            let f = initial_field(shape, 1, 40, amp, 0)?;
            Ok((format!("{shape} a={amp} alpha={alpha} mu={mu}"), DnlsProblem::new(alpha, mu, f, 8.0, 2.0)?))
        })
        .collect()
}

/// One decoupling measurement of a scan.
#[derive(Clone, Debug)]
pub struct DecouplingRecord {
    pub k: f64,
    pub p: f64,
    pub draw: usize,
    pub slabs: usize,
    pub result: DecouplingResult,
}

/// Decoupling ratios on the ball `B(0, K)` for every `(K, p, draw)`. Slab data
/// are seeded by `(seed, K, draw)` and shared across `p`; the QMC points by
/// `(seed + 1, K, draw)`.
pub fn decoupling_scan(
    geo: DecouplingGeometry,
    ks: &[f64],
    ps: &[f64],
    draws: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<DecouplingRecord>> {
    let mut out = Vec::new();
    for &k in ks {
        let (geometry, slabs) = geo.build(k, None)?;
        let data: Vec<_> = (0..draws).map(|d| unimodular_slab_data(&slabs, mix_seed(seed, k as u64, d as u64))).collect();
        for &p in ps {
            for (draw, g) in data.iter().enumerate() {
                let plan = BallNormPlan::new(geometry.space_dim(), p, k, samples, mix_seed(seed.wrapping_add(1), k as u64, draw as u64))?;
                let result = decoupling_check(&geometry, &slabs, g, &plan)?;
                out.push(DecouplingRecord { k, p, draw, slabs: slabs.len(), result });
            }
        }
    }
    Ok(out)
}

/// Ratio for the first slab alone, which must be 1.
pub fn single_slab_ratio(geo: DecouplingGeometry, k: f64, p: f64, samples: usize, seed: u64) -> Result<f64> {
    let (geometry, slabs) = geo.build(k, None)?;
    let data = unimodular_slab_data(&slabs[..1], mix_seed(seed, k as u64, 0));
    let plan = BallNormPlan::new(geometry.space_dim(), p, k, samples, mix_seed(seed.wrapping_add(1), k as u64, 0))?;
    Ok(decoupling_check(&geometry, &slabs[..1], &data, &plan)?.ratio)
}

/// Largest ratio per `K` at exponent `p`, in increasing `K`.
pub fn max_ratio_by_k(records: &[DecouplingRecord], p: f64) -> Vec<(f64, f64)> {
    let mut ks: Vec<f64> = records.iter().filter(|r| r.p == p).map(|r| r.k).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    ks.iter()
        .map(|&k| (k, records.iter().filter(|r| r.p == p && r.k == k).map(|r| r.result.ratio).fold(0.0, f64::max)))
        .collect()
}

/// Decoupling over `balls` disjoint balls of radius `K` centered on the first
/// axis at spacing `3K`, all for the same slab data.
pub fn parallel_balls(
    geo: DecouplingGeometry,
    k: f64,
    p: f64,
    balls: usize,
    samples: usize,
    seed: u64,
) -> Result<(Vec<BallDecoupling>, CombineReport)> {
    let (geometry, slabs) = geo.build(k, None)?;
    let data = unimodular_slab_data(&slabs, mix_seed(seed, k as u64, 0));
    let dim = geometry.space_dim();
    let measured = (0..balls)
        .map(|i| {
            let mut center = vec![0.0; dim];
            center[0] = 3.0 * k * i as f64;
            let plan = BallNormPlan::new(dim, p, k, samples, mix_seed(seed.wrapping_add(1), k as u64, i as u64))?
                .with_center(center.clone())?;
            Ok(BallDecoupling { center, radius: k, result: decoupling_check(&geometry, &slabs, &data, &plan)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = parallel_combine_check(&measured)?;
    Ok((measured, report))
}

/// Restriction constants at each radius and, when at least three radii with
/// positive estimates are present, the fitted growth exponent.
pub fn restriction_pipeline(
    geometry: &Geometry,
    p: f64,
    q: f64,
    radii: &[f64],
    families: &[TestFamily],
    samples: usize,
    seed: u64,
) -> Result<(Vec<ConstantEstimate>, Option<GrowthFit>)> {
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let estimates = restriction_scan(geometry, p, q, &sorted, families, samples, seed)?;
    let points: Vec<(f64, f64)> = estimates.iter().map(|e| (e.scale, e.value)).collect();
    let fit = if points.len() >= 3 && points.iter().all(|&(_, v)| v > 0.0) { Some(fit_growth_exponent(&points)?) } else { None };
    Ok((estimates, fit))
}
