//! Norms over balls and time intervals, the decoupling and restriction-constant
//! experiments, Strichartz admissibility, and the translation-averaging
//! identity linking the continuum and discrete extension operators.
//!
//! Ball integrals use randomly shifted Kronecker points (see [`crate::qmc`]).
//! Every estimate is the mean of [`SCRAMBLES`] independent shifts and carries
//! the standard error of that mean. Evaluations run in parallel but are
//! collected in sample order and reduced pairwise, so results do not depend on
//! the thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dnls::SolutionPath;
use crate::error::{domain, precondition, Result};
use crate::extension::{
    CurveDensity, CurveSpec, Extension, PreparedCurve, PreparedSurface, SurfaceDensity, SurfaceSpec,
};
use crate::finitetype::{
    decompose_interval, decompose_mixed_square, decompose_square, symmetric_interval, unit_interval,
    Interval, Phase1D, Rect, RegionLabel, Slab, SlabKind,
};
use crate::lattice::{forward_dft, inverse_dft, LatticeField, TorusFunction, TorusGrid, C64};
use crate::qmc::{mix_seed, pairwise_sum, shifted_kronecker, SCRAMBLES};
use crate::quadrature::composite;

/// Smallest sample count a ball plan accepts.
pub const MIN_SAMPLES: usize = 1 << 10;

/// Tolerance for closed-form exponent comparisons.
const EXPONENT_TOL: f64 = 1e-12;

/// How sample radii are distributed in the ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialLaw {
    /// One volume-uniform stratum over the whole ball.
    Uniform,
    /// Volume-uniform within each dyadic shell `[0,1], [1,2], [2,4], …`, with
    /// `samples` points per shell. A ball then reuses the exact samples of
    /// every smaller dyadic ball, which makes estimates monotone in the radius.
    Shells,
}

impl RadialLaw {
    pub fn tag(self) -> &'static str {
        match self {
            RadialLaw::Uniform => "uniform",
            RadialLaw::Shells => "shells",
        }
    }
}

/// Sampling plan for `(∫_{B_R(c)} |F|^p)^{1/p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallNormPlan {
    pub dim: usize,
    pub p: f64,
    pub radius: f64,
    /// Points per stratum, split evenly over the shifts.
    pub samples: usize,
    pub seed: u64,
    pub center: Vec<f64>,
    pub radial: RadialLaw,
}

impl BallNormPlan {
    /// Plan for the ball of radius `radius` at the origin of `ℝ^dim`.
    pub fn new(dim: usize, p: f64, radius: f64, samples: usize, seed: u64) -> Result<Self> {
        let plan = Self { dim, p, radius, samples, seed, center: vec![0.0; dim], radial: RadialLaw::Uniform };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Result<Self> {
        self.center = center;
        self.validate()?;
        Ok(self)
    }

    pub fn with_radial(mut self, radial: RadialLaw) -> Self {
        self.radial = radial;
        self
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        self.p = p;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 2 || self.dim == 3) {
            return domain(format!("balls live in ℝ² or ℝ³, got dimension {}", self.dim));
        }
        if !(self.p >= 1.0) {
            return domain(format!("exponent p = {} must be at least 1", self.p));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return domain(format!("ball radius {} must be positive", self.radius));
        }
        if self.samples < MIN_SAMPLES {
            return precondition(format!("{} samples requested, at least {MIN_SAMPLES} required", self.samples));
        }
        if self.center.len() != self.dim || self.center.iter().any(|c| !c.is_finite()) {
            return precondition("ball center must be a finite point of the ball's dimension");
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        ball_volume(self.dim, self.radius)
    }
}

fn ball_volume(dim: usize, r: f64) -> f64 {
    match dim {
        2 => PI * r * r,
        _ => 4.0 / 3.0 * PI * r * r * r,
    }
}

/// A Monte Carlo norm with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Estimate of `∫|F|^p` (of `sup|F|` when `p = ∞`).
    pub power: f64,
    pub power_stderr: f64,
}

impl NormEstimate {
    pub const ZERO: NormEstimate = NormEstimate { value: 0.0, stderr: 0.0, power: 0.0, power_stderr: 0.0 };
}

#[derive(Clone, Copy, Debug)]
struct Shell {
    hi: f64,
    volume: f64,
    start: usize,
    per_shift: usize,
}

/// Fixed sample points of a ball plan, shared by every field evaluated on it.
#[derive(Clone, Debug)]
pub struct BallSampler {
    plan: BallNormPlan,
    coords: Vec<f64>,
    shells: Vec<Shell>,
}

impl BallSampler {
    pub fn new(plan: &BallNormPlan) -> Result<Self> {
        Self::with_breaks(plan, &[])
    }

    /// Sampler whose strata also split at each radius in `breaks`, so that
    /// [`BallSampler::estimate_within`] is exact bookkeeping at those radii.
    pub fn with_breaks(plan: &BallNormPlan, breaks: &[f64]) -> Result<Self> {
        plan.validate()?;
        let r = plan.radius;
        let mut bounds = vec![0.0, r];
        if plan.radial == RadialLaw::Shells {
            let mut b = 1.0;
            while b < r {
                bounds.push(b);
                b *= 2.0;
            }
        }
        bounds.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < r));
        bounds.sort_by(f64::total_cmp);
        bounds.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        let per_shift = plan.samples / SCRAMBLES;
        let d = plan.dim;
        let mut coords = Vec::new();
        let mut shells = Vec::new();
        for w in bounds.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let start = coords.len() / d;
            let seed = mix_seed(plan.seed, lo.to_bits(), hi.to_bits());
            let (lo_d, hi_d) = (lo.powi(d as i32), hi.powi(d as i32));
            for u in shifted_kronecker(d, per_shift, seed) {
                let r = (lo_d + u[0] * (hi_d - lo_d)).powf(1.0 / d as f64);
                if d == 2 {
                    let phi = 2.0 * PI * u[1];
                    coords.push(plan.center[0] + r * phi.cos());
                    coords.push(plan.center[1] + r * phi.sin());
                } else {
                    let z = 1.0 - 2.0 * u[1];
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let phi = 2.0 * PI * u[2];
                    coords.push(plan.center[0] + r * rho * phi.cos());
                    coords.push(plan.center[1] + r * rho * phi.sin());
                    coords.push(plan.center[2] + r * z);
                }
            }
            shells.push(Shell { hi, volume: ball_volume(d, hi) - ball_volume(d, lo), start, per_shift });
        }
        Ok(Self { plan: plan.clone(), coords, shells })
    }

    pub fn plan(&self) -> &BallNormPlan {
        &self.plan
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.plan.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.plan.dim;
        &self.coords[i * d..(i + 1) * d]
    }

    /// `f` at every sample point, in sample order.
    pub fn evaluate<T: Send>(&self, f: impl Fn(&[f64]) -> Result<T> + Sync) -> Result<Vec<T>> {
        (0..self.len()).into_par_iter().map(|i| f(self.point(i))).collect()
    }

    /// Estimate from values of `|F|` at the sample points.
    pub fn estimate(&self, moduli: &[f64]) -> NormEstimate {
        self.estimate_within(moduli, self.plan.radius)
    }

    /// Estimate over the strata inside radius `radius`.
    pub fn estimate_within(&self, moduli: &[f64], radius: f64) -> NormEstimate {
        self.estimate_with_p(moduli, radius, self.plan.p)
    }

    fn estimate_with_p(&self, moduli: &[f64], radius: f64, p: f64) -> NormEstimate {
        debug_assert_eq!(moduli.len(), self.len());
        let shells: Vec<&Shell> = self.shells.iter().filter(|s| s.hi <= radius * (1.0 + 1e-12)).collect();
        let mut per_shift = [0.0f64; SCRAMBLES];
        for (s, slot) in per_shift.iter_mut().enumerate() {
            if p.is_infinite() {
                *slot = shells
                    .iter()
                    .flat_map(|sh| &moduli[sh.start + s * sh.per_shift..sh.start + (s + 1) * sh.per_shift])
                    .fold(0.0, |a, &b| a.max(b));
            } else {
                let parts: Vec<f64> = shells
                    .iter()
                    .map(|sh| {
                        let seg = &moduli[sh.start + s * sh.per_shift..sh.start + (s + 1) * sh.per_shift];
                        let pw: Vec<f64> = seg.iter().map(|m| m.powf(p)).collect();
                        sh.volume * pairwise_sum(&pw) / sh.per_shift as f64
                    })
                    .collect();
                *slot = pairwise_sum(&parts);
            }
        }
        if p.is_infinite() {
            let value = per_shift.iter().fold(0.0f64, |a, &b| a.max(b));
            let se = spread(&per_shift);
            return NormEstimate { value, stderr: se, power: value, power_stderr: se };
        }
        let power = pairwise_sum(&per_shift) / SCRAMBLES as f64;
        let se = spread(&per_shift);
        if power <= 0.0 {
            return NormEstimate::ZERO;
        }
        let value = power.powf(1.0 / p);
        NormEstimate { value, stderr: value * se / (p * power), power, power_stderr: se }
    }
}

/// Standard error of the mean of the per-shift estimates.
fn spread(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// `(∫_{B_R} |F|^p)^{1/p}` for `F` given through its modulus; `p = ∞` gives the
/// sample maximum, a lower bound for the true supremum.
pub fn ball_lp_norm(modulus: impl Fn(&[f64]) -> Result<f64> + Sync, plan: &BallNormPlan) -> Result<NormEstimate> {
    let sampler = BallSampler::new(plan)?;
    let m = sampler.evaluate(modulus)?;
    Ok(sampler.estimate(&m))
}

/// [`ball_lp_norm`] of an extension operator.
pub fn ball_lp_norm_of(ext: &dyn Extension, plan: &BallNormPlan) -> Result<NormEstimate> {
    if ext.space_dim() != plan.dim {
        return precondition(format!("operator acts on ℝ^{}, ball is in ℝ^{}", ext.space_dim(), plan.dim));
    }
    ball_lp_norm(|x| Ok(ext.eval(x)?.norm()), plan)
}

/// `‖u‖_{L^q_t(I; ℓ^r_x)}` by the composite trapezoid rule on the path's
/// time grid, interpolating linearly at interval ends that fall inside a step.
pub fn mixed_norm(path: &SolutionPath, q: f64, r: f64, interval: (f64, f64)) -> Result<f64> {
    let (a, b) = interval;
    if !(q >= 1.0 && r >= 1.0) {
        return domain(format!("mixed norm exponents ({q}, {r}) must be at least 1"));
    }
    let times = path.times();
    let (tmin, tmax) = times.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    let tol = 1e-12 * (tmax - tmin).abs().max(1.0);
    if !(a <= b) || a < tmin - tol || b > tmax + tol {
        return domain(format!("interval [{a}, {b}] is not inside the path's time range [{tmin}, {tmax}]"));
    }
    let mut nodes: Vec<(f64, f64)> = times.iter().zip(path.fields()).map(|(&t, u)| (t, u.norm_lp(r))).collect();
    nodes.sort_by(|x, y| x.0.total_cmp(&y.0));
    let lerp = |x0: (f64, f64), x1: (f64, f64), t: f64| {
        let w = if x1.0 > x0.0 { (t - x0.0) / (x1.0 - x0.0) } else { 0.0 };
        x0.1 + w * (x1.1 - x0.1)
    };
    if q.is_infinite() {
        let mut m = 0.0f64;
        for w in nodes.windows(2) {
            let (lo, hi) = (w[0].0.max(a), w[1].0.min(b));
            if lo <= hi {
                m = m.max(lerp(w[0], w[1], lo)).max(lerp(w[0], w[1], hi));
            }
        }
        return Ok(m);
    }
    let mut parts = Vec::new();
    for w in nodes.windows(2) {
        let (lo, hi) = (w[0].0.max(a), w[1].0.min(b));
        if hi > lo {
            let ga = lerp(w[0], w[1], lo).powf(q);
            let gb = lerp(w[0], w[1], hi).powf(q);
            parts.push(0.5 * (hi - lo) * (ga + gb));
        }
    }
    Ok(pairwise_sum(&parts).powf(1.0 / q))
}

/// Hölder conjugate, with `1 ↔ ∞`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `‖f‖_{L̂^p} = ‖𝓕f‖_{L^{p'}(𝕋^d)}` with the normalized measure, as a Riemann
/// sum on `grid`. For `p = 2` any grid resolving the window is exact.
pub fn fourier_lebesgue_norm_on(f: &LatticeField, p: f64, grid: TorusGrid) -> Result<f64> {
    if !(p >= 1.0) {
        return domain(format!("Fourier–Lebesgue exponent {p} must be at least 1"));
    }
    Ok(forward_dft(f, grid)?.norm_lp(conjugate(p)))
}

/// [`fourier_lebesgue_norm_on`] on a grid oversampling the window fourfold
/// (twofold in two dimensions).
pub fn fourier_lebesgue_norm(f: &LatticeField, p: f64) -> Result<f64> {
    let factor = if f.dim() == 1 { 4 } else { 2 };
    let modes = (factor * (2 * f.radius() + 2)).next_power_of_two().max(16);
    fourier_lebesgue_norm_on(f, p, TorusGrid::new(f.dim(), modes)?)
}

/// Strichartz admissibility: `q, r ≥ 2`, `(q, r, d) ≠ (2, ∞, 3)` and
/// `1/q + d/(3r) ≤ d/6`.
pub fn is_admissible(q: f64, r: f64, d: usize) -> bool {
    if !(q >= 2.0 && r >= 2.0) {
        return false;
    }
    if q == 2.0 && r.is_infinite() && d == 3 {
        return false;
    }
    let d = d as f64;
    1.0 / q + d / (3.0 * r) <= d / 6.0 + EXPONENT_TOL
}

/// An exponent pair for the Strichartz estimates of the lattice flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissiblePair {
    pub q: f64,
    pub r: f64,
    pub d: usize,
}

impl AdmissiblePair {
    pub fn is_admissible(&self) -> bool {
        is_admissible(self.q, self.r, self.d)
    }
}

/// Range of the sharp restriction estimate `L^q → L^p` for type-3 curves:
/// `0 ≤ 1/p < 1/4` and `1/q + 4/p ≤ 1`.
pub fn curve_restriction_range(p: f64, q: f64) -> bool {
    let (ip, iq) = (1.0 / p, 1.0 / q);
    p >= 1.0 && q >= 1.0 && ip < 0.25 && iq + 4.0 * ip <= 1.0 + EXPONENT_TOL
}

/// Exponents `(p, q)` for which the lattice flow obeys
/// `‖e^{itΔ}f‖_{L^p_{t,x}} ≲ ‖f‖_{L̂^{q'}}`, as used by the well-posedness
/// theory. Here `p` is the space-time exponent and `q ≥ 2`.
pub fn dnls_exponent_region(d: usize, p: f64, q: f64) -> bool {
    if !(q >= 2.0 && p >= 1.0) {
        return false;
    }
    let (ip, iq) = (1.0 / p, 1.0 / q);
    match d {
        1 if q.is_infinite() => ip < 0.25,
        1 => ip <= (1.0 - iq) / 4.0 + EXPONENT_TOL,
        2 if (iq - 0.5).abs() <= EXPONENT_TOL => ip <= 0.2 + EXPONENT_TOL,
        2 => ip < 7.0 / 22.0 - 13.0 / 55.0 * iq,
        _ => false,
    }
}

/// Curve or surface on which an extension experiment runs.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Curve(CurveSpec),
    Surface(SurfaceSpec),
}

impl Geometry {
    pub fn space_dim(&self) -> usize {
        match self {
            Geometry::Curve(_) => 2,
            Geometry::Surface(_) => 3,
        }
    }

    /// `(t, t³)` over `[-1, 1]`.
    pub fn cubic_curve() -> Result<Self> {
        let iv = symmetric_interval();
        Ok(Geometry::Curve(CurveSpec::new(Phase1D::monomial(3, iv)?, iv)?))
    }

    /// `ξ₁³ ± ξ₂³` over `[0, 1]²`.
    pub fn prototypical_surface(sign: f64) -> Result<Self> {
        Ok(Geometry::Surface(SurfaceSpec::prototypical(sign)?))
    }
}

/// Density on a [`Geometry`].
#[derive(Clone, Debug)]
pub enum Density {
    Curve(CurveDensity),
    Surface(SurfaceDensity),
}

impl Density {
    pub fn norm_lq(&self, q: f64) -> f64 {
        match self {
            Density::Curve(g) => g.norm_lq(q),
            Density::Surface(g) => g.norm_lq(q),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        match self {
            Density::Curve(g) => Density::Curve(g.scale(c)),
            Density::Surface(g) => Density::Surface(g.scale(c)),
        }
    }

    /// Extension operator of this density on `geometry`.
    pub fn prepare(&self, geometry: &Geometry) -> Result<Box<dyn Extension>> {
        match (self, geometry) {
            (Density::Curve(g), Geometry::Curve(c)) => Ok(Box::new(PreparedCurve::new(c, g)?)),
            (Density::Surface(g), Geometry::Surface(s)) => Ok(Box::new(PreparedSurface::new(s, g)?)),
            _ => precondition("density and geometry disagree on curve versus surface"),
        }
    }

    /// Whether the support lies in the slab's parameter footprint.
    pub fn within_slab(&self, slab: &Slab) -> bool {
        match (self, slab.rect()) {
            (Density::Curve(g), None) => g.domain().within(&slab.u, 1e-12),
            (Density::Surface(g), Some(r)) => g.domain().within(&r, 1e-12),
            _ => false,
        }
    }
}

/// Result of one decoupling measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct DecouplingResult {
    pub p: f64,
    /// `‖Σ_θ E g_θ‖_{L^p(B)}`.
    pub lhs: f64,
    /// `(Σ_θ ‖E g_θ‖²_{L^p(B)})^{1/2}`.
    pub rhs: f64,
    pub ratio: f64,
    pub lhs_stderr: f64,
    /// `∫_B |Σ_θ E g_θ|^p`.
    pub lhs_power: f64,
    /// `∫_B |E g_θ|^p` per slab.
    pub slab_powers: Vec<f64>,
}

/// Measure both sides of the `ℓ²` decoupling inequality for slab data `g_θ`
/// over the ball of `plan`, with `p = plan.p`.
pub fn decoupling_check(
    geometry: &Geometry,
    slabs: &[Slab],
    densities: &[Density],
    plan: &BallNormPlan,
) -> Result<DecouplingResult> {
    if slabs.is_empty() {
        return domain("decoupling needs at least one slab");
    }
    if slabs.len() != densities.len() {
        return precondition(format!("{} slabs but {} densities", slabs.len(), densities.len()));
    }
    let p = plan.p;
    if !(2.0..=6.0).contains(&p) {
        return domain(format!("decoupling exponent p = {p} outside [2, 6]"));
    }
    let first = slabs[0];
    if slabs.iter().any(|s| s.kind != first.kind || s.lambda != first.lambda || s.k != first.k) {
        return precondition("slabs come from different covers");
    }
    let kind_ok = matches!(
        (first.kind, geometry),
        (SlabKind::CurveTheta, Geometry::Curve(_)) | (SlabKind::SurfaceTau | SlabKind::MixedTau, Geometry::Surface(_))
    );
    if !kind_ok {
        return precondition(format!("{} slabs do not belong to this geometry", first.kind.tag()));
    }
    if plan.dim != geometry.space_dim() {
        return precondition("ball dimension differs from the geometry's ambient dimension");
    }
    if let Some(i) = (0..slabs.len()).find(|&i| !densities[i].within_slab(&slabs[i])) {
        return precondition(format!("density {i} is not supported in its slab"));
    }
    let pieces: Vec<Box<dyn Extension>> = densities.iter().map(|g| g.prepare(geometry)).collect::<Result<_>>()?;
    let sampler = BallSampler::new(plan)?;
    let values: Vec<Vec<C64>> = sampler.evaluate(|x| pieces.iter().map(|e| e.eval(x)).collect())?;
    let total: Vec<f64> = values.iter().map(|v| v.iter().sum::<C64>().norm()).collect();
    let lhs = sampler.estimate(&total);
    let slab_est: Vec<NormEstimate> = (0..pieces.len())
        .map(|j| sampler.estimate(&values.iter().map(|v| v[j].norm()).collect::<Vec<_>>()))
        .collect();
    let squares: Vec<f64> = slab_est.iter().map(|e| e.value * e.value).collect();
    let rhs = pairwise_sum(&squares).sqrt();
    let ratio = if rhs > 0.0 { lhs.value / rhs } else { 0.0 };
    Ok(DecouplingResult {
        p,
        lhs: lhs.value,
        rhs,
        ratio,
        lhs_stderr: lhs.stderr,
        lhs_power: lhs.power,
        slab_powers: slab_est.iter().map(|e| e.power).collect(),
    })
}

/// A decoupling measurement tagged with its ball.
#[derive(Clone, Debug, PartialEq)]
pub struct BallDecoupling {
    pub center: Vec<f64>,
    pub radius: f64,
    pub result: DecouplingResult,
}

/// Outcome of combining decoupling measurements over disjoint balls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CombineReport {
    pub union_ratio: f64,
    pub max_ratio: f64,
    pub holds: bool,
}

/// Decoupling over a disjoint union of balls from the per-ball measurements:
/// the union's sides are assembled from the per-ball integrals, and the union
/// ratio may not exceed the worst ball ratio.
pub fn parallel_combine_check(balls: &[BallDecoupling]) -> Result<CombineReport> {
    let Some(first) = balls.first() else {
        return domain("parallel combination needs at least one ball");
    };
    let (p, n) = (first.result.p, first.result.slab_powers.len());
    if balls.iter().any(|b| b.result.p != p || b.result.slab_powers.len() != n) {
        return precondition("balls carry measurements of different slab data");
    }
    for (i, a) in balls.iter().enumerate() {
        for b in &balls[i + 1..] {
            let dist = a.center.iter().zip(&b.center).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            if dist < a.radius + b.radius {
                return precondition("balls overlap");
            }
        }
    }
    let lhs = pairwise_sum(&balls.iter().map(|b| b.result.lhs_power).collect::<Vec<_>>()).powf(1.0 / p);
    let per_slab: Vec<f64> = (0..n)
        .map(|j| pairwise_sum(&balls.iter().map(|b| b.result.slab_powers[j]).collect::<Vec<_>>()).powf(2.0 / p))
        .collect();
    let rhs = pairwise_sum(&per_slab).sqrt();
    let union_ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    let max_ratio = balls.iter().map(|b| b.result.ratio).fold(0.0, f64::max);
    Ok(CombineReport { union_ratio, max_ratio, holds: union_ratio <= max_ratio + 1e-6 })
}

/// Slab geometries of the decoupling experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecouplingGeometry {
    /// `(t, t³)` on `[-1, 1]`, slabs of the positive piece `[λ, 2λ]`.
    CurveTheta,
    /// `ξ₁³ ± ξ₂³`, slabs of the piece `[λ, 2λ] × [0, K^{-1/3}]`.
    SurfaceTau { sign: f64 },
    /// `ξ₁² ± ξ₂³`, slabs of the strip `[0, 1] × [0, K^{-1/3}]`.
    MixedTau { sign: f64 },
}

impl DecouplingGeometry {
    pub fn tag(&self) -> String {
        let s = |x: f64| if x > 0.0 { "+" } else { "-" };
        match self {
            DecouplingGeometry::CurveTheta => "curve-theta".into(),
            DecouplingGeometry::SurfaceTau { sign } => format!("surface-tau{}", s(*sign)),
            DecouplingGeometry::MixedTau { sign } => format!("mixed-tau{}", s(*sign)),
        }
    }

    /// Geometry and slab cover at scale `K`. `lambda` selects a dyadic scale;
    /// the largest one is used when it is `None`.
    pub fn build(&self, k: f64, lambda: Option<f64>) -> Result<(Geometry, Vec<Slab>)> {
        let pick = |regions: Vec<crate::finitetype::Region>| -> Result<crate::finitetype::Region> {
            let mut pieces: Vec<_> = regions
                .into_iter()
                .filter(|r| matches!(r.label, RegionLabel::OmegaLambda { axis: 0, .. }))
                .collect();
            match lambda {
                None => pieces.pop().ok_or_else(|| crate::Error::Domain("no dyadic pieces".into())),
                Some(l) => pieces
                    .into_iter()
                    .find(|r| r.lambda().is_some_and(|x| (x - l).abs() <= 1e-12 * l))
                    .ok_or_else(|| crate::Error::Domain(format!("λ = {l} is not a dyadic scale for K = {k}"))),
            }
        };
        match *self {
            DecouplingGeometry::CurveTheta => {
                let region = pick(decompose_interval(k)?)?;
                Ok((Geometry::cubic_curve()?, crate::finitetype::slab_cover(&region, k, SlabKind::CurveTheta)?))
            }
            DecouplingGeometry::SurfaceTau { sign } => {
                let region = pick(decompose_square(k)?)?;
                Ok((Geometry::prototypical_surface(sign)?, crate::finitetype::slab_cover(&region, k, SlabKind::SurfaceTau)?))
            }
            DecouplingGeometry::MixedTau { sign } => {
                let strip = decompose_mixed_square(k)?
                    .into_iter()
                    .find(|r| r.label == RegionLabel::TildeOmega1)
                    .expect("mixed decomposition has a degenerate strip");
                let unit = unit_interval();
                let surface = SurfaceSpec::new(Phase1D::monomial(2, unit)?, Phase1D::monomial(3, unit)?, sign, Rect::unit())?;
                Ok((Geometry::Surface(surface), crate::finitetype::slab_cover(&strip, k, SlabKind::MixedTau)?))
            }
        }
    }
}

/// Random unimodular slab data: on slab `θ`, `c_θ e^{i a_θ·ξ}` with `|c_θ| = 1`
/// and `a_θ` uniform in `[-K/4, K/4]` per frequency axis, translating each
/// wave packet inside the ball of radius `K`.
pub fn unimodular_slab_data(slabs: &[Slab], seed: u64) -> Vec<Density> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    slabs
        .iter()
        .map(|slab| {
            let c = C64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
            let reach = slab.k / 4.0;
            let a1 = reach * (2.0 * rng.random::<f64>() - 1.0);
            let a2 = reach * (2.0 * rng.random::<f64>() - 1.0);
            match slab.rect() {
                None => Density::Curve(CurveDensity::cap(slab.u, c, a1)),
                Some(r) => Density::Surface(SurfaceDensity::cap(r, c, (a1, a2))),
            }
        })
        .collect()
}

/// Number of random-sign draws per family.
pub const RANDOM_SIGN_DRAWS: usize = 8;

/// Density families probing the restriction constant.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFamily {
    Zero,
    Constant,
    /// Cap indicators `[λ, λ + ρ^{-1/3}] × [0, ρ^{-1/3}]`, `λ ∈ {0, 1/4, 1/2}`
    /// (curves: `[0, ρ^{-1/3}]`, `[-ρ^{-1/3}, 0]`, `[1/2, 1/2 + ρ^{-1/3}]`) at
    /// every dyadic scale `16 ≤ ρ ≤ R` and at the scanned radii.
    Knapp,
    /// ±1 on a `grid × grid` (curves: `grid`) cell partition, several draws.
    RandomSigns { grid: usize },
    /// Indicators of the single dyadic pieces `Ω_λ` at parameter `k`.
    DyadicIndicators { k: f64 },
}

impl TestFamily {
    pub fn id(&self) -> String {
        match self {
            TestFamily::Zero => "zero".into(),
            TestFamily::Constant => "constant".into(),
            TestFamily::Knapp => "knapp".into(),
            TestFamily::RandomSigns { grid } => format!("random-signs:{grid}"),
            TestFamily::DyadicIndicators { k } => format!("dyadic:{k}"),
        }
    }

    /// Inverse of [`TestFamily::id`]; `random-signs` and `dyadic` default to
    /// an 8-cell grid and `k = 64`.
    pub fn parse(s: &str) -> Option<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("zero", None) => Some(TestFamily::Zero),
            ("constant", None) => Some(TestFamily::Constant),
            ("knapp", None) => Some(TestFamily::Knapp),
            ("random-signs", None) => Some(TestFamily::RandomSigns { grid: 8 }),
            ("random-signs", Some(a)) => a.parse().ok().filter(|&g| g > 0).map(|grid| TestFamily::RandomSigns { grid }),
            ("dyadic", None) => Some(TestFamily::DyadicIndicators { k: 64.0 }),
            ("dyadic", Some(a)) => a.parse().ok().filter(|&k: &f64| k >= 8.0).map(|k| TestFamily::DyadicIndicators { k }),
            _ => None,
        }
    }

    /// Constants, Knapp caps, random signs on an 8-grid, and `Ω_λ` at `K = 64`.
    pub fn design_set() -> Vec<Self> {
        vec![
            TestFamily::Constant,
            TestFamily::Knapp,
            TestFamily::RandomSigns { grid: 8 },
            TestFamily::DyadicIndicators { k: 64.0 },
        ]
    }
}

/// One density of a family, taking part from radius `scale` on.
#[derive(Clone, Debug)]
pub struct FamilyInstance {
    pub id: String,
    pub density: Density,
    pub scale: f64,
}

fn knapp_scales(radii: &[f64]) -> Vec<f64> {
    let top = radii.iter().copied().fold(0.0, f64::max);
    let mut out: Vec<f64> = radii.to_vec();
    let mut r = 16.0;
    while r <= top {
        out.push(r);
        r *= 2.0;
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Members of `families` on `geometry` for a scan over `radii`.
pub fn family_instances(
    geometry: &Geometry,
    families: &[TestFamily],
    radii: &[f64],
    seed: u64,
) -> Result<Vec<FamilyInstance>> {
    let mut out = Vec::new();
    let one = C64::new(1.0, 0.0);
    for (fi, family) in families.iter().enumerate() {
        let base = family.id();
        match (family, geometry) {
            (TestFamily::Zero, Geometry::Curve(c)) => {
                out.push(FamilyInstance { id: base, density: Density::Curve(CurveDensity::constant(c.domain(), C64::new(0.0, 0.0))), scale: 0.0 })
            }
            (TestFamily::Zero, Geometry::Surface(s)) => out.push(FamilyInstance {
                id: base,
                density: Density::Surface(SurfaceDensity::constant(s.domain(), C64::new(0.0, 0.0))),
                scale: 0.0,
            }),
            (TestFamily::Constant, Geometry::Curve(c)) => {
                out.push(FamilyInstance { id: base, density: Density::Curve(CurveDensity::constant(c.domain(), one)), scale: 0.0 })
            }
            (TestFamily::Constant, Geometry::Surface(s)) => {
                out.push(FamilyInstance { id: base, density: Density::Surface(SurfaceDensity::constant(s.domain(), one)), scale: 0.0 })
            }
            (TestFamily::Knapp, _) => {
                for rho in knapp_scales(radii) {
                    let side = rho.powf(-1.0 / 3.0);
                    match geometry {
                        Geometry::Curve(c) => {
                            for lo in [0.0, -side, 0.5] {
                                let Some(iv) = Interval::new(lo, lo + side).ok().and_then(|iv| iv.intersect(&c.domain())) else {
                                    continue;
                                };
                                if iv.len() <= 0.0 {
                                    continue;
                                }
                                out.push(FamilyInstance {
                                    id: format!("knapp:rho={rho}:at={lo:.4}"),
                                    density: Density::Curve(CurveDensity::constant(iv, one)),
                                    scale: rho,
                                });
                            }
                        }
                        Geometry::Surface(s) => {
                            for lambda in [0.0, 0.25, 0.5] {
                                let cap = Rect::new(Interval { lo: lambda, hi: lambda + side }, Interval { lo: 0.0, hi: side });
                                let Some(r) = cap.intersect(&s.domain()) else { continue };
                                if r.area() <= 0.0 {
                                    continue;
                                }
                                out.push(FamilyInstance {
                                    id: format!("knapp:rho={rho}:at={lambda}"),
                                    density: Density::Surface(SurfaceDensity::constant(r, one)),
                                    scale: rho,
                                });
                            }
                        }
                    }
                }
            }
            (TestFamily::RandomSigns { grid }, _) => {
                for draw in 0..RANDOM_SIGN_DRAWS {
                    let s = mix_seed(seed, fi as u64, draw as u64);
                    let density = match geometry {
                        Geometry::Curve(c) => Density::Curve(CurveDensity::random_signs(c.domain(), *grid, s)),
                        Geometry::Surface(sf) => Density::Surface(SurfaceDensity::random_signs(sf.domain(), *grid, s)),
                    };
                    out.push(FamilyInstance { id: format!("{base}:draw={draw}"), density, scale: 0.0 });
                }
            }
            (TestFamily::DyadicIndicators { k }, _) => match geometry {
                Geometry::Curve(c) => {
                    for r in decompose_interval(*k)? {
                        if let RegionLabel::OmegaLambda { lambda, axis } = r.label {
                            if let Some(iv) = r.u.intersect(&c.domain()).filter(|iv| iv.len() > 0.0) {
                                out.push(FamilyInstance {
                                    id: format!("{base}:lambda={lambda:.4}:axis={axis}"),
                                    density: Density::Curve(CurveDensity::constant(iv, one)),
                                    scale: 0.0,
                                });
                            }
                        }
                    }
                }
                Geometry::Surface(s) => {
                    for r in decompose_square(*k)? {
                        if let (RegionLabel::OmegaLambda { lambda, axis }, Some(rect)) = (r.label, r.rect()) {
                            if let Some(rect) = rect.intersect(&s.domain()).filter(|x| x.area() > 0.0) {
                                out.push(FamilyInstance {
                                    id: format!("{base}:lambda={lambda:.4}:axis={axis}"),
                                    density: Density::Surface(SurfaceDensity::constant(rect, one)),
                                    scale: 0.0,
                                });
                            }
                        }
                    }
                }
            },
        }
    }
    Ok(out)
}

/// Empirical restriction constant at one scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantEstimate {
    /// Ball radius `R` (or decomposition parameter `K`).
    pub scale: f64,
    /// `max_g ‖E g‖_{L^p(B_R)} / ‖g‖_{L^q}` over the family instances: an
    /// empirical lower bound for the optimal constant.
    pub value: f64,
    pub stderr: f64,
    /// Id of the maximizing instance.
    pub family: String,
    pub p: f64,
    pub q: f64,
    pub samples: usize,
    pub seed: u64,
}

/// [`restriction_scan`] at a single radius.
pub fn estimate_restriction_constant(
    geometry: &Geometry,
    p: f64,
    q: f64,
    radius: f64,
    families: &[TestFamily],
    samples: usize,
    seed: u64,
) -> Result<ConstantEstimate> {
    Ok(restriction_scan(geometry, p, q, &[radius], families, samples, seed)?.remove(0))
}

/// Empirical restriction constants at each radius in `radii`.
///
/// Balls are sampled in dyadic shells (plus shells ending at each scanned
/// radius) with `samples` points per shell; a larger ball reuses the samples
/// of every smaller one, so the estimates are non-decreasing in `R` whenever
/// the family is.
pub fn restriction_scan(
    geometry: &Geometry,
    p: f64,
    q: f64,
    radii: &[f64],
    families: &[TestFamily],
    samples: usize,
    seed: u64,
) -> Result<Vec<ConstantEstimate>> {
    if families.is_empty() {
        return precondition("restriction scan needs at least one family");
    }
    if radii.is_empty() {
        return precondition("restriction scan needs at least one radius");
    }
    if !(q >= 1.0) {
        return domain(format!("density exponent q = {q} must be at least 1"));
    }
    let top = radii.iter().copied().fold(0.0, f64::max);
    let plan = BallNormPlan::new(geometry.space_dim(), p, top, samples, seed)?.with_radial(RadialLaw::Shells);
    let sampler = BallSampler::with_breaks(&plan, radii)?;
    let instances = family_instances(geometry, families, radii, seed)?;
    let mut measured = Vec::with_capacity(instances.len());
    for inst in &instances {
        let norm_g = inst.density.norm_lq(q);
        if norm_g == 0.0 {
            measured.push((inst, norm_g, None));
            continue;
        }
        let ext = inst.density.prepare(geometry)?;
        let moduli = sampler.evaluate(|x| Ok(ext.eval(x)?.norm()))?;
        measured.push((inst, norm_g, Some(moduli)));
    }
    Ok(radii
        .iter()
        .map(|&r| {
            let mut best = (0.0, 0.0, instances.first().map(|i| i.id.clone()).unwrap_or_default());
            let mut first = true;
            for (inst, norm_g, moduli) in &measured {
                if inst.scale > r * (1.0 + 1e-12) {
                    continue;
                }
                let (v, se) = match moduli {
                    Some(m) => {
                        let e = sampler.estimate_within(m, r);
                        (e.value / norm_g, e.stderr / norm_g)
                    }
                    None => (0.0, 0.0),
                };
                if first || v > best.0 {
                    best = (v, se, inst.id.clone());
                    first = false;
                }
            }
            ConstantEstimate { scale: r, value: best.0, stderr: best.1, family: best.2, p, q, samples, seed }
        })
        .collect())
}

/// Least-squares fit of `log Q̂ = ε̂ log R + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `log Q̂`.
    pub residual: f64,
}

pub fn fit_growth_exponent(points: &[(f64, f64)]) -> Result<GrowthFit> {
    if points.len() < 3 {
        return precondition(format!("growth fit needs at least 3 points, got {}", points.len()));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) || points[0].0 <= 0.0 {
        return precondition("scales must be positive and strictly increasing");
    }
    if let Some((r, q)) = points.iter().find(|(_, q)| !(*q > 0.0)) {
        return domain(format!("nonpositive value {q} at scale {r}"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual =
        (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(GrowthFit { exponent, intercept, residual })
}

/// `e^{-(ξ-c)²/(2σ²)} e^{imξ}` on `[-π, π]`; for `|c| + 8σ ≤ π` it is smooth and
/// periodic to roundoff, which the translation-averaging corpus relies on.
pub fn gaussian_bump(center: f64, width: f64, modulation: f64) -> Result<CurveDensity> {
    if !(width > 0.0) {
        return domain(format!("bump width {width} must be positive"));
    }
    let iv = Interval::new(-PI, PI)?;
    Ok(CurveDensity::from_fn(iv, 1.0, Vec::new(), move |xi| {
        let s = (xi - center) / width;
        C64::from_polar((-0.5 * s * s).exp(), modulation * xi)
    }))
}

/// Both sides of the translation-averaging identity for one exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslationAverage {
    pub p: f64,
    /// `∫_{-T}^{T} ∫_{-N}^{N+1} |E_S F(x, t)|^p dx dt`.
    pub continuum: f64,
    /// `(2π)^p ∫_0^1 Σ_{|k|≤N} ∫_{-T}^{T} |E^disc(e^{ixξ}F)(k, t)|^p dt dx`.
    pub discrete: f64,
    pub gap: f64,
    /// For `p = 2`: `2T · 2π ∫|F|²`, the untruncated value by Plancherel.
    pub plancherel: Option<f64>,
}

/// [`translation_average_multi`] for a single exponent.
pub fn translation_average_check(f: &CurveDensity, p: f64, t_window: f64, n_window: usize) -> Result<TranslationAverage> {
    Ok(translation_average_multi(f, &[p], t_window, n_window)?.remove(0))
}

/// Truncated sides of
/// `‖E_S F‖^p_{L^p} = (2π)^p ∫_𝕋 ‖E^disc(e^{ixξ}F)‖^p_{L^p(ℤ×ℝ)} dx` in `d = 1`,
/// where `S = {(ξ, -ω(ξ))}`. Time is cut to `[-T, T]` and space to
/// `[-N, N+1]` on both sides, so any gap is quadrature error.
///
/// The continuum side integrates over `ξ` with the oscillatory Gauss–Legendre
/// rule; the discrete side uses the torus average on an FFT grid.
pub fn translation_average_multi(
    f: &CurveDensity,
    ps: &[f64],
    t_window: f64,
    n_window: usize,
) -> Result<Vec<TranslationAverage>> {
    let torus = Interval::new(-PI, PI)?;
    if !f.domain().within(&torus, 1e-12) {
        return domain(format!("density support {} is not inside [-π, π]", f.domain()));
    }
    if !(t_window.is_finite() && t_window > 0.0) {
        return domain(format!("time window {t_window} must be positive"));
    }
    if ps.iter().any(|&p| !(p.is_finite() && p >= 1.0)) {
        return domain("translation averaging needs finite exponents p ≥ 1");
    }
    let n = n_window as f64;
    let (tc, twc) = composite(-t_window, t_window, &[], 0.4);
    let (td, twd) = composite(-t_window, t_window, &[], 0.5);
    let (xa, wa) = composite(0.0, 1.0, &[], 0.5);
    let xs: Vec<f64> = (-(n_window as i64)..=n_window as i64).flat_map(|k| xa.iter().map(move |x| k as f64 + x)).collect();
    let wx: Vec<f64> = (0..2 * n_window + 1).flat_map(|_| wa.iter().copied()).collect();

    // Continuum side: ξ-rule resolving phases up to (N+1) + 2T.
    let iv = f.domain();
    let width = (1.0f64 / 16.0).min(4.0 / (1.0 + n + 1.0 + 2.0 * t_window));
    let (xi, wxi) = composite(iv.lo, iv.hi, f.breaks(), width);
    let fw: Vec<C64> = xi.iter().zip(&wxi).map(|(&s, &w)| w * f.eval(s)).collect();
    let om: Vec<f64> = xi.iter().map(|&s| 4.0 * (0.5 * s).sin().powi(2)).collect();
    let table: Vec<C64> = xs.iter().flat_map(|&x| xi.iter().map(move |&s| C64::from_polar(1.0, x * s))).collect();
    let cont_rows: Vec<Vec<f64>> = (0..tc.len())
        .into_par_iter()
        .map(|ti| {
            let t = tc[ti];
            let a: Vec<C64> = fw.iter().zip(&om).map(|(g, w)| g * C64::from_polar(1.0, -t * w)).collect();
            let mut acc = vec![Vec::with_capacity(xs.len()); ps.len()];
            for (xi_row, w) in table.chunks(a.len()).zip(&wx) {
                let e: C64 = xi_row.iter().zip(&a).map(|(z, g)| z * g).sum();
                let m = e.norm();
                for (slot, &p) in acc.iter_mut().zip(ps) {
                    slot.push(w * m.powf(p));
                }
            }
            acc.iter().map(|v| twc[ti] * pairwise_sum(v)).collect()
        })
        .collect();

    // Discrete side: torus averages on an FFT grid wide enough for the window,
    // the group velocity 2 and the density's own bandwidth.
    let modes = (4 * (n_window + 1) + (16.0 * t_window).ceil() as usize + 256).next_power_of_two().max(1024);
    let grid = TorusGrid::new(1, modes)?;
    let nodes: Vec<f64> = (0..modes).map(|j| grid.node(j)).collect();
    let fv: Vec<C64> = nodes.iter().map(|&s| f.eval(s)).collect();
    let omega = grid.omega_table();
    let scale: Vec<f64> = ps.iter().map(|&p| (2.0 * PI).powf(p)).collect();
    let disc_rows: Vec<Vec<f64>> = (0..td.len())
        .into_par_iter()
        .map(|ti| -> Result<Vec<f64>> {
            let t = td[ti];
            let mut acc = vec![Vec::with_capacity(xa.len()); ps.len()];
            for (&x, &w) in xa.iter().zip(&wa) {
                let v: Vec<C64> = nodes
                    .iter()
                    .zip(&fv)
                    .zip(&omega)
                    .map(|((&s, g), &o)| g * C64::from_polar(1.0, x * s - t * o))
                    .collect();
                let e = inverse_dft(&TorusFunction::new(grid, v)?, n_window)?;
                for (slot, (&p, c)) in acc.iter_mut().zip(ps.iter().zip(&scale)) {
                    let s: Vec<f64> = e.values().iter().map(|z| z.norm().powf(p)).collect();
                    slot.push(w * c * pairwise_sum(&s));
                }
            }
            Ok(acc.iter().map(|v| twd[ti] * pairwise_sum(v)).collect())
        })
        .collect::<Result<_>>()?;

    let l2 = {
        let (s, w) = composite(iv.lo, iv.hi, f.breaks(), 1.0 / 64.0);
        pairwise_sum(&s.iter().zip(&w).map(|(&x, w)| w * f.eval(x).norm_sqr()).collect::<Vec<_>>())
    };
    Ok(ps
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let continuum = pairwise_sum(&cont_rows.iter().map(|r| r[i]).collect::<Vec<_>>());
            let discrete = pairwise_sum(&disc_rows.iter().map(|r| r[i]).collect::<Vec<_>>());
            let big = continuum.max(discrete);
            let gap = if big > 0.0 { (continuum - discrete).abs() / big } else { 0.0 };
            let plancherel = (p == 2.0).then(|| 2.0 * t_window * 2.0 * PI * l2);
            TranslationAverage { p, continuum, discrete, gap, plancherel }
        })
        .collect())
}
