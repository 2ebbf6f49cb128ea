//! Extension operators for curves and surfaces, the discrete extension
//! operator, and the rescaling changes of variables as intertwinings.
//!
//! Oscillatory integrals use composite 16-point Gauss–Legendre quadrature with
//! panels no wider than `min(1/16, 4/(1 + |y₁| + 3|y₂|·sup|φ'|))` per axis, so
//! each panel sees a bounded number of oscillations.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, precondition, Error, Result};
use crate::finitetype::{
    classify_finite_type, Interval, Phase1D, PhaseKind, Rect, RescaledPhase, RescalingMap, Slab,
    SlabKind,
};
use crate::lattice::{check_propagation, TorusFunction, TorusGrid, C64};
use crate::quadrature::{composite, panel_count};

/// Curve `{(t, φ(t)) : t ∈ domain}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSpec {
    phase: Phase1D,
    domain: Interval,
    sup_slope: f64,
}

impl CurveSpec {
    pub fn new(phase: Phase1D, domain: Interval) -> Result<Self> {
        if !domain.within(&phase.domain(), 1e-12) {
            return precondition(format!("curve domain {domain} exceeds phase domain {}", phase.domain()));
        }
        let sup_slope = phase.sup_abs_derivative(domain);
        Ok(Self { phase, domain, sup_slope })
    }

    pub fn phase(&self) -> &Phase1D {
        &self.phase
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Sampled upper estimate of `sup |φ'|` on the domain.
    pub fn sup_slope(&self) -> f64 {
        self.sup_slope
    }
}

/// Surface `{(ξ₁, ξ₂, φ₁(ξ₁) + sign·φ₂(ξ₂))}` over a rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpec {
    first: CurveSpec,
    second: CurveSpec,
    sign: f64,
}

impl SurfaceSpec {
    pub fn new(phase1: Phase1D, phase2: Phase1D, sign: f64, domain: Rect) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return domain_error(format!("surface sign must be ±1, got {sign}"));
        }
        Ok(Self { first: CurveSpec::new(phase1, domain.u)?, second: CurveSpec::new(phase2, domain.v)?, sign })
    }

    /// `ξ₁³ ± ξ₂³` over `[0,1]²`.
    pub fn prototypical(sign: f64) -> Result<Self> {
        let unit = crate::finitetype::unit_interval();
        let cube = Phase1D::monomial(3, unit)?;
        Self::new(cube.clone(), cube, sign, Rect::unit())
    }

    pub fn phase1(&self) -> &Phase1D {
        &self.first.phase
    }

    pub fn phase2(&self) -> &Phase1D {
        &self.second.phase
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn domain(&self) -> Rect {
        Rect { u: self.first.domain, v: self.second.domain }
    }

    pub fn height(&self, u: f64, v: f64) -> f64 {
        self.first.phase.eval(u) + self.sign * self.second.phase.eval(v)
    }
}

fn domain_error<T>(msg: String) -> Result<T> {
    domain(msg)
}

type CurveFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;
type SurfaceFn = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;

/// Bounded complex density on an interval, zero outside it.
#[derive(Clone)]
pub struct CurveDensity {
    domain: Interval,
    sup_bound: f64,
    breaks: Vec<f64>,
    eval: CurveFn,
}

impl fmt::Debug for CurveDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveDensity")
            .field("domain", &self.domain)
            .field("sup_bound", &self.sup_bound)
            .field("breaks", &self.breaks.len())
            .finish()
    }
}

fn uniform_breaks(domain: Interval, cells: usize) -> Vec<f64> {
    (1..cells).map(|i| domain.lo + domain.len() * i as f64 / cells as f64).collect()
}

impl CurveDensity {
    /// Density given by `f`, with `sup_bound ≥ sup |f|` and the points where `f`
    /// may be non-smooth.
    pub fn from_fn(
        domain: Interval,
        sup_bound: f64,
        breaks: Vec<f64>,
        f: impl Fn(f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self { domain, sup_bound, breaks, eval: Arc::new(f) }
    }

    pub fn constant(domain: Interval, c: C64) -> Self {
        Self::from_fn(domain, c.norm(), Vec::new(), move |_| c)
    }

    /// `amplitude · e^{i·freq·t}` on `domain`: a modulated cap indicator.
    pub fn cap(domain: Interval, amplitude: C64, freq: f64) -> Self {
        Self::from_fn(domain, amplitude.norm(), Vec::new(), move |t| amplitude * C64::from_polar(1.0, freq * t))
    }

    /// Independent ±1 values on `cells` equal subintervals.
    pub fn random_signs(domain: Interval, cells: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let signs: Vec<f64> = (0..cells).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        Self::steps(domain, signs.into_iter().map(|s| C64::new(s, 0.0)).collect())
    }

    /// Piecewise-constant density with equal cells.
    pub fn steps(domain: Interval, values: Vec<C64>) -> Self {
        let cells = values.len().max(1);
        let sup = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let breaks = uniform_breaks(domain, cells);
        Self::from_fn(domain, sup, breaks, move |t| {
            let i = (((t - domain.lo) / domain.len()) * cells as f64).floor();
            values[(i.max(0.0) as usize).min(cells - 1)]
        })
    }

    /// Linear interpolation of samples at equispaced points including both ends.
    pub fn samples(domain: Interval, values: Vec<C64>) -> Result<Self> {
        if values.len() < 2 {
            return domain_error("interpolated density needs at least two samples".into());
        }
        let n = values.len() - 1;
        let sup = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let breaks = uniform_breaks(domain, n);
        Ok(Self::from_fn(domain, sup, breaks, move |t| {
            let x = ((t - domain.lo) / domain.len() * n as f64).clamp(0.0, n as f64);
            let i = (x.floor() as usize).min(n - 1);
            let w = x - i as f64;
            values[i] * (1.0 - w) + values[i + 1] * w
        }))
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn eval(&self, t: f64) -> C64 {
        if self.domain.contains(t) {
            (self.eval)(t)
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let inner = self.eval.clone();
        Self { sup_bound: self.sup_bound * c.norm(), eval: Arc::new(move |t| c * inner(t)), ..self.clone() }
    }

    /// Multiply by `e^{i·a·t}`.
    pub fn modulate(&self, a: f64) -> Self {
        let inner = self.eval.clone();
        Self { eval: Arc::new(move |t| C64::from_polar(1.0, a * t) * inner(t)), ..self.clone() }
    }

    /// Restriction to `interval`; `None` when the supports do not meet.
    pub fn restrict(&self, interval: Interval) -> Option<Self> {
        let domain = self.domain.intersect(&interval)?;
        Some(Self { domain, ..self.clone() })
    }

    /// `u ↦ weight · g(dilation·u + shift)` on the preimage of the support.
    pub fn pullback(&self, weight: f64, dilation: f64, shift: f64) -> Self {
        let a = (self.domain.lo - shift) / dilation;
        let b = (self.domain.hi - shift) / dilation;
        let domain = Interval { lo: a.min(b), hi: a.max(b) };
        let inner = self.eval.clone();
        Self {
            domain,
            sup_bound: self.sup_bound * weight.abs(),
            breaks: self.breaks.iter().map(|x| (x - shift) / dilation).collect(),
            eval: Arc::new(move |u| weight * inner(dilation * u + shift)),
        }
    }

    /// `L^q` norm by the same composite rule the extension operator uses.
    pub fn norm_lq(&self, q: f64) -> f64 {
        if q.is_infinite() {
            let (x, _) = composite(self.domain.lo, self.domain.hi, &self.breaks, 1.0 / 64.0);
            return x.iter().map(|&t| self.eval(t).norm()).fold(0.0, f64::max);
        }
        let (x, w) = composite(self.domain.lo, self.domain.hi, &self.breaks, 1.0 / 64.0);
        x.iter().zip(&w).map(|(&t, w)| w * self.eval(t).norm().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

#[derive(Clone)]
enum SurfaceRepr {
    /// `Σ_ij coupling[i·B + j] · first[i](ξ₁) · second[j](ξ₂)`.
    Factored { first: Vec<CurveDensity>, second: Vec<CurveDensity>, coupling: Vec<C64> },
    General(SurfaceFn),
}

/// Bounded complex density on a rectangle, zero outside it.
///
/// Densities built from one-variable factors keep that structure through
/// restriction, modulation and per-axis pullbacks, which lets the surface
/// extension operator factor into curve extensions.
#[derive(Clone)]
pub struct SurfaceDensity {
    domain: Rect,
    sup_bound: f64,
    breaks_u: Vec<f64>,
    breaks_v: Vec<f64>,
    repr: SurfaceRepr,
}

impl fmt::Debug for SurfaceDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceDensity")
            .field("domain", &self.domain)
            .field("sup_bound", &self.sup_bound)
            .field("factored", &self.is_factored())
            .finish()
    }
}

impl SurfaceDensity {
    pub fn from_fn(
        domain: Rect,
        sup_bound: f64,
        breaks: (Vec<f64>, Vec<f64>),
        f: impl Fn(f64, f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self { domain, sup_bound, breaks_u: breaks.0, breaks_v: breaks.1, repr: SurfaceRepr::General(Arc::new(f)) }
    }

    /// `Σ_ij coupling[i][j] first[i] ⊗ second[j]` with a caller-supplied sup bound.
    pub fn factored(
        domain: Rect,
        sup_bound: f64,
        first: Vec<CurveDensity>,
        second: Vec<CurveDensity>,
        coupling: Vec<C64>,
    ) -> Result<Self> {
        if coupling.len() != first.len() * second.len() {
            return precondition("coupling matrix does not match factor counts");
        }
        let breaks_u = first.iter().flat_map(|g| g.breaks.iter().copied().chain([g.domain.lo, g.domain.hi])).collect();
        let breaks_v = second.iter().flat_map(|g| g.breaks.iter().copied().chain([g.domain.lo, g.domain.hi])).collect();
        Ok(Self { domain, sup_bound, breaks_u, breaks_v, repr: SurfaceRepr::Factored { first, second, coupling } })
    }

    pub fn separable(first: CurveDensity, second: CurveDensity) -> Self {
        let domain = Rect { u: first.domain, v: second.domain };
        let sup = first.sup_bound * second.sup_bound;
        Self::factored(domain, sup, vec![first], vec![second], vec![C64::new(1.0, 0.0)])
            .expect("1x1 coupling")
    }

    pub fn constant(domain: Rect, c: C64) -> Self {
        Self::separable(CurveDensity::constant(domain.u, c), CurveDensity::constant(domain.v, C64::new(1.0, 0.0)))
    }

    /// `amplitude · e^{i(a₁ξ₁ + a₂ξ₂)}` on `domain`.
    pub fn cap(domain: Rect, amplitude: C64, freq: (f64, f64)) -> Self {
        Self::separable(
            CurveDensity::cap(domain.u, amplitude, freq.0),
            CurveDensity::cap(domain.v, C64::new(1.0, 0.0), freq.1),
        )
    }

    /// Independent ±1 values on an `n × n` grid of equal cells.
    pub fn random_signs(domain: Rect, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coupling: Vec<C64> =
            (0..n * n).map(|_| C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)).collect();
        let cells = |iv: Interval| -> Vec<CurveDensity> {
            (0..n)
                .map(|i| {
                    let lo = iv.lo + iv.len() * i as f64 / n as f64;
                    let hi = iv.lo + iv.len() * (i + 1) as f64 / n as f64;
                    CurveDensity::constant(Interval { lo, hi }, C64::new(1.0, 0.0))
                })
                .collect()
        };
        Self::factored(domain, 1.0, cells(domain.u), cells(domain.v), coupling).expect("n x n coupling")
    }

    /// Bilinear interpolation of an `(n_u + 1) × (n_v + 1)` row-major sample grid.
    pub fn samples(domain: Rect, nu: usize, nv: usize, values: Vec<C64>) -> Result<Self> {
        if nu == 0 || nv == 0 || values.len() != (nu + 1) * (nv + 1) {
            return precondition("sample grid shape mismatch");
        }
        let sup = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let breaks = (uniform_breaks(domain.u, nu), uniform_breaks(domain.v, nv));
        Ok(Self::from_fn(domain, sup, breaks, move |a, b| {
            let x = ((a - domain.u.lo) / domain.u.len() * nu as f64).clamp(0.0, nu as f64);
            let y = ((b - domain.v.lo) / domain.v.len() * nv as f64).clamp(0.0, nv as f64);
            let i = (x.floor() as usize).min(nu - 1);
            let j = (y.floor() as usize).min(nv - 1);
            let (wx, wy) = (x - i as f64, y - j as f64);
            let at = |i: usize, j: usize| values[i * (nv + 1) + j];
            at(i, j) * ((1.0 - wx) * (1.0 - wy))
                + at(i + 1, j) * (wx * (1.0 - wy))
                + at(i, j + 1) * ((1.0 - wx) * wy)
                + at(i + 1, j + 1) * (wx * wy)
        }))
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn is_factored(&self) -> bool {
        matches!(self.repr, SurfaceRepr::Factored { .. })
    }

    pub fn eval(&self, a: f64, b: f64) -> C64 {
        if !(self.domain.u.contains(a) && self.domain.v.contains(b)) {
            return C64::new(0.0, 0.0);
        }
        match &self.repr {
            SurfaceRepr::General(f) => f(a, b),
            SurfaceRepr::Factored { first, second, coupling } => {
                let nb = second.len();
                let vb: Vec<C64> = second.iter().map(|g| g.eval(b)).collect();
                let mut acc = C64::new(0.0, 0.0);
                for (i, g) in first.iter().enumerate() {
                    let va = g.eval(a);
                    if va == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (j, w) in vb.iter().enumerate() {
                        acc += coupling[i * nb + j] * va * w;
                    }
                }
                acc
            }
        }
    }

    /// Same data viewed as a general density, forcing tensor quadrature.
    pub fn to_general(&self) -> Self {
        let me = self.clone();
        Self {
            repr: SurfaceRepr::General(Arc::new(move |a, b| me.eval(a, b))),
            ..self.clone()
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let repr = match &self.repr {
            SurfaceRepr::Factored { first, second, coupling } => SurfaceRepr::Factored {
                first: first.clone(),
                second: second.clone(),
                coupling: coupling.iter().map(|z| z * c).collect(),
            },
            SurfaceRepr::General(f) => {
                let f = f.clone();
                SurfaceRepr::General(Arc::new(move |a, b| c * f(a, b)))
            }
        };
        Self { sup_bound: self.sup_bound * c.norm(), repr, ..self.clone() }
    }

    /// Multiply by `e^{i(a₁ξ₁ + a₂ξ₂)}`.
    pub fn modulate(&self, a1: f64, a2: f64) -> Self {
        let repr = match &self.repr {
            SurfaceRepr::Factored { first, second, coupling } => SurfaceRepr::Factored {
                first: first.iter().map(|g| g.modulate(a1)).collect(),
                second: second.iter().map(|g| g.modulate(a2)).collect(),
                coupling: coupling.clone(),
            },
            SurfaceRepr::General(f) => {
                let f = f.clone();
                SurfaceRepr::General(Arc::new(move |a, b| C64::from_polar(1.0, a1 * a + a2 * b) * f(a, b)))
            }
        };
        Self { repr, ..self.clone() }
    }

    /// Restriction to `rect`; `None` when the supports do not meet.
    pub fn restrict(&self, rect: Rect) -> Option<Self> {
        let domain = self.domain.intersect(&rect)?;
        let repr = match &self.repr {
            SurfaceRepr::Factored { first, second, coupling } => {
                let nb = second.len();
                let keep_a: Vec<usize> = (0..first.len()).filter(|&i| first[i].domain.intersect(&domain.u).is_some()).collect();
                let keep_b: Vec<usize> = (0..nb).filter(|&j| second[j].domain.intersect(&domain.v).is_some()).collect();
                if keep_a.is_empty() || keep_b.is_empty() {
                    return None;
                }
                SurfaceRepr::Factored {
                    first: keep_a.iter().map(|&i| first[i].restrict(domain.u).expect("checked")).collect(),
                    second: keep_b.iter().map(|&j| second[j].restrict(domain.v).expect("checked")).collect(),
                    coupling: keep_a.iter().flat_map(|&i| keep_b.iter().map(move |&j| coupling[i * nb + j])).collect(),
                }
            }
            SurfaceRepr::General(f) => SurfaceRepr::General(f.clone()),
        };
        Some(Self { domain, repr, ..self.clone() })
    }

    /// `η ↦ weight · g(s₁ + d₁η₁, s₂ + d₂η₂)` with `(dᵢ, sᵢ)` per axis.
    pub fn pullback(&self, weight: f64, axis1: (f64, f64), axis2: (f64, f64)) -> Self {
        let (d1, s1) = axis1;
        let (d2, s2) = axis2;
        let map = |iv: Interval, d: f64, s: f64| {
            let a = (iv.lo - s) / d;
            let b = (iv.hi - s) / d;
            Interval { lo: a.min(b), hi: a.max(b) }
        };
        let domain = Rect { u: map(self.domain.u, d1, s1), v: map(self.domain.v, d2, s2) };
        let repr = match &self.repr {
            SurfaceRepr::Factored { first, second, coupling } => SurfaceRepr::Factored {
                first: first.iter().map(|g| g.pullback(1.0, d1, s1)).collect(),
                second: second.iter().map(|g| g.pullback(1.0, d2, s2)).collect(),
                coupling: coupling.iter().map(|z| z * weight).collect(),
            },
            SurfaceRepr::General(f) => {
                let f = f.clone();
                SurfaceRepr::General(Arc::new(move |a, b| weight * f(d1 * a + s1, d2 * b + s2)))
            }
        };
        Self {
            domain,
            sup_bound: self.sup_bound * weight.abs(),
            breaks_u: self.breaks_u.iter().map(|x| (x - s1) / d1).collect(),
            breaks_v: self.breaks_v.iter().map(|x| (x - s2) / d2).collect(),
            repr,
        }
    }

    /// `L^q` norm over the domain by tensor quadrature.
    pub fn norm_lq(&self, q: f64) -> f64 {
        let (xu, wu) = composite(self.domain.u.lo, self.domain.u.hi, &self.breaks_u, 1.0 / 16.0);
        let (xv, wv) = composite(self.domain.v.lo, self.domain.v.hi, &self.breaks_v, 1.0 / 16.0);
        let mut acc = 0.0f64;
        for (a, wa) in xu.iter().zip(&wu) {
            for (b, wb) in xv.iter().zip(&wv) {
                let m = self.eval(*a, *b).norm();
                if q.is_infinite() {
                    acc = acc.max(m);
                } else {
                    acc += wa * wb * m.powf(q);
                }
            }
        }
        if q.is_infinite() {
            acc
        } else {
            acc.powf(1.0 / q)
        }
    }
}

/// A point and the value of an extension operator there.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub point: Vec<f64>,
    pub value: C64,
}

impl FieldSample {
    /// `|value| ≤ sup ‖g‖ · |domain|`, the trivial bound.
    pub fn within_trivial_bound(&self, sup_bound: f64, measure: f64) -> bool {
        self.value.norm() <= sup_bound * measure * (1.0 + 1e-12) + 1e-300
    }
}

/// Panel width control for the oscillatory quadrature.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadraturePlan {
    /// Fixed panel width; `None` uses the panel rule for each evaluation point.
    pub panel_width: Option<f64>,
}

impl QuadraturePlan {
    pub fn auto() -> Self {
        Self { panel_width: None }
    }

    pub fn fixed(width: f64) -> Self {
        Self { panel_width: Some(width) }
    }
}

/// Widest panel the rule allows for frequency pair `(y₁, y₂)`.
pub fn panel_rule_width(y1: f64, y2: f64, sup_slope: f64) -> f64 {
    (1.0f64 / 16.0).min(4.0 / (1.0 + y1.abs() + 3.0 * y2.abs() * sup_slope))
}

const MAX_LEVEL: usize = 48;

fn level_width(level: usize) -> f64 {
    (-(level as f64)).exp2() / 16.0
}

/// Coarsest dyadic level whose width satisfies the rule.
fn level_for(width: f64) -> usize {
    (0..MAX_LEVEL).find(|&l| level_width(l) <= width).unwrap_or(MAX_LEVEL - 1)
}

struct NodeSet {
    t: Vec<f64>,
    phi: Vec<f64>,
    wg: Vec<C64>,
}

/// A curve and density with quadrature nodes cached per dyadic panel width,
/// for repeated evaluation of `E g(y) = ∫ g(t) e^{i(y₁t + y₂φ(t))} dt`.
pub struct PreparedCurve {
    curve: CurveSpec,
    density: CurveDensity,
    interval: Option<Interval>,
    levels: Vec<OnceLock<NodeSet>>,
}

impl PreparedCurve {
    pub fn new(curve: &CurveSpec, density: &CurveDensity) -> Result<Self> {
        if !density.domain.within(&curve.domain, 1e-12) {
            return precondition(format!(
                "density support {} is not inside curve domain {}",
                density.domain, curve.domain
            ));
        }
        Ok(Self {
            curve: curve.clone(),
            density: density.clone(),
            interval: density.domain.intersect(&curve.domain),
            levels: (0..MAX_LEVEL).map(|_| OnceLock::new()).collect(),
        })
    }

    fn nodes(&self, level: usize) -> &NodeSet {
        self.levels[level].get_or_init(|| {
            let Some(iv) = self.interval else {
                return NodeSet { t: vec![], phi: vec![], wg: vec![] };
            };
            let (t, w) = composite(iv.lo, iv.hi, &self.density.breaks, level_width(level));
            let phi = t.iter().map(|&x| self.curve.phase.eval(x)).collect();
            let wg = t.iter().zip(&w).map(|(&x, &w)| w * self.density.eval(x)).collect();
            NodeSet { t, phi, wg }
        })
    }

    fn level(&self, y: &[f64], plan: QuadraturePlan) -> Result<usize> {
        let rule = panel_rule_width(y[0], y[1], self.curve.sup_slope);
        match plan.panel_width {
            None => Ok(level_for(rule)),
            Some(w) if w <= rule * (1.0 + 1e-12) => Ok(level_for(w)),
            Some(_) => {
                let iv = self.interval.unwrap_or(self.density.domain);
                Err(Error::Resolution {
                    what: format!("curve extension at y = ({}, {})", y[0], y[1]),
                    required: panel_count(iv.lo, iv.hi, &self.density.breaks, rule),
                })
            }
        }
    }

    fn sum_at(&self, level: usize, y: &[f64]) -> C64 {
        let n = self.nodes(level);
        let mut acc = C64::new(0.0, 0.0);
        for ((t, phi), wg) in n.t.iter().zip(&n.phi).zip(&n.wg) {
            acc += wg * C64::from_polar(1.0, y[0] * t + y[1] * phi);
        }
        acc
    }

    pub fn eval_with(&self, y: &[f64], plan: QuadraturePlan) -> Result<C64> {
        let level = self.level(y, plan)?;
        Ok(self.sum_at(level, y))
    }

    /// Value together with the change under one extra halving of the panels.
    pub fn eval_checked(&self, y: &[f64], plan: QuadraturePlan) -> Result<(C64, f64)> {
        let level = self.level(y, plan)?;
        let v = self.sum_at(level, y);
        let fine = self.sum_at((level + 1).min(MAX_LEVEL - 1), y);
        Ok((v, (v - fine).norm()))
    }

    pub fn density(&self) -> &CurveDensity {
        &self.density
    }
}

/// Point evaluator used by the norm estimators.
pub trait Extension: Send + Sync {
    /// Dimension of the ambient space.
    fn space_dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<C64>;
}

impl Extension for PreparedCurve {
    fn space_dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64]) -> Result<C64> {
        self.eval_with(x, QuadraturePlan::auto())
    }
}

enum PreparedRepr {
    Factored { first: Vec<PreparedCurve>, second: Vec<PreparedCurve>, coupling: Vec<C64> },
    General(SurfaceDensity),
}

/// Surface and density prepared for repeated evaluation.
pub struct PreparedSurface {
    surface: SurfaceSpec,
    repr: PreparedRepr,
}

impl PreparedSurface {
    pub fn new(surface: &SurfaceSpec, density: &SurfaceDensity) -> Result<Self> {
        if !density.domain.within(&surface.domain(), 1e-12) {
            return precondition("density support is not inside the surface domain");
        }
        let repr = match &density.repr {
            SurfaceRepr::Factored { first, second, coupling } => PreparedRepr::Factored {
                first: first.iter().map(|g| PreparedCurve::new(&surface.first, g)).collect::<Result<_>>()?,
                second: second.iter().map(|g| PreparedCurve::new(&surface.second, g)).collect::<Result<_>>()?,
                coupling: coupling.clone(),
            },
            SurfaceRepr::General(_) => PreparedRepr::General(density.clone()),
        };
        Ok(Self { surface: surface.clone(), repr })
    }

    pub fn eval_with(&self, x: &[f64], plan: QuadraturePlan) -> Result<C64> {
        match &self.repr {
            PreparedRepr::Factored { first, second, coupling } => {
                let y1 = [x[0], x[2]];
                let y2 = [x[1], self.surface.sign * x[2]];
                let a: Vec<C64> = first.iter().map(|p| p.eval_with(&y1, plan)).collect::<Result<_>>()?;
                let b: Vec<C64> = second.iter().map(|p| p.eval_with(&y2, plan)).collect::<Result<_>>()?;
                let mut acc = C64::new(0.0, 0.0);
                for (i, ai) in a.iter().enumerate() {
                    let mut row = C64::new(0.0, 0.0);
                    for (j, bj) in b.iter().enumerate() {
                        row += coupling[i * b.len() + j] * bj;
                    }
                    acc += ai * row;
                }
                Ok(acc)
            }
            PreparedRepr::General(g) => extend_surface_tensor(&self.surface, g, x, plan),
        }
    }
}

impl Extension for PreparedSurface {
    fn space_dim(&self) -> usize {
        3
    }

    fn eval(&self, x: &[f64]) -> Result<C64> {
        self.eval_with(x, QuadraturePlan::auto())
    }
}

/// `E g(y) = ∫ g(t) e^{i(y₁t + y₂φ(t))} dt` over the curve.
pub fn extend_curve(curve: &CurveSpec, g: &CurveDensity, y: &[f64], plan: QuadraturePlan) -> Result<C64> {
    if y.len() != 2 {
        return domain_error(format!("curve extension needs a point in R², got {} coordinates", y.len()));
    }
    PreparedCurve::new(curve, g)?.eval_with(y, plan)
}

/// `E g(x) = ∬ g(ξ) e^{i(x₁ξ₁ + x₂ξ₂ + x₃(φ₁(ξ₁) ± φ₂(ξ₂)))} dξ`, factoring into
/// curve extensions when the density is built from one-variable factors.
pub fn extend_surface(surface: &SurfaceSpec, g: &SurfaceDensity, x: &[f64], plan: QuadraturePlan) -> Result<C64> {
    if x.len() != 3 {
        return domain_error(format!("surface extension needs a point in R³, got {} coordinates", x.len()));
    }
    PreparedSurface::new(surface, g)?.eval_with(x, plan)
}

/// Tensor-product quadrature of the surface extension, for any density.
pub fn extend_surface_tensor(surface: &SurfaceSpec, g: &SurfaceDensity, x: &[f64], plan: QuadraturePlan) -> Result<C64> {
    if x.len() != 3 {
        return domain_error(format!("surface extension needs a point in R³, got {} coordinates", x.len()));
    }
    if !g.domain.within(&surface.domain(), 1e-12) {
        return precondition("density support is not inside the surface domain");
    }
    let axis = |spec: &CurveSpec, y: [f64; 2], iv: Interval, breaks: &[f64]| -> Result<(Vec<f64>, Vec<C64>)> {
        let rule = panel_rule_width(y[0], y[1], spec.sup_slope);
        let width = match plan.panel_width {
            None => level_width(level_for(rule)),
            Some(w) if w <= rule * (1.0 + 1e-12) => level_width(level_for(w)),
            Some(_) => {
                return Err(Error::Resolution {
                    what: format!("surface extension at x = {x:?}"),
                    required: panel_count(iv.lo, iv.hi, breaks, rule),
                })
            }
        };
        let (t, w) = composite(iv.lo, iv.hi, breaks, width);
        let e = t.iter().zip(&w).map(|(&t, &w)| w * C64::from_polar(1.0, y[0] * t + y[1] * spec.phase.eval(t))).collect();
        Ok((t, e))
    };
    let (tu, eu) = axis(&surface.first, [x[0], x[2]], g.domain.u, &g.breaks_u)?;
    let (tv, ev) = axis(&surface.second, [x[1], surface.sign * x[2]], g.domain.v, &g.breaks_v)?;
    let mut acc = C64::new(0.0, 0.0);
    for (a, ea) in tu.iter().zip(&eu) {
        let mut row = C64::new(0.0, 0.0);
        for (b, eb) in tv.iter().zip(&ev) {
            row += g.eval(*a, *b) * eb;
        }
        acc += ea * row;
    }
    Ok(acc)
}

/// `M^{-d} Σ_j e^{ik·ξ_j} e^{-itω(ξ_j)} v(ξ_j)`: the torus average realizing
/// `(2π)^{-d} ∫ e^{ik·ξ} e^{-itω(ξ)} v(ξ) dξ`.
pub fn discrete_extend(v: &TorusFunction, k: &[i64], t: f64) -> Result<C64> {
    let grid = v.grid();
    if k.len() != grid.dim() {
        return domain_error(format!("lattice point has {} coordinates, grid is {}-dimensional", k.len(), grid.dim()));
    }
    let reach = k.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0);
    if check_propagation(reach, t, grid).is_err() {
        return Err(Error::Resolution {
            what: format!("discrete extension at k = {k:?}, t = {t}"),
            required: crate::lattice::propagation_modes(reach, t),
        });
    }
    let omega = grid.omega_table();
    let mut acc = C64::new(0.0, 0.0);
    for (i, (z, w)) in v.values().iter().zip(&omega).enumerate() {
        let p = grid.point(i);
        let kx: f64 = k.iter().zip(p.iter()).map(|(&k, &x)| k as f64 * x).sum();
        acc += z * C64::from_polar(1.0, kx - t * w);
    }
    Ok(acc / grid.len() as f64)
}

/// Curve data after the change of variables `t = λu + λ`.
#[derive(Clone, Debug)]
pub struct CurveRescaling {
    pub density: CurveDensity,
    pub curve: CurveSpec,
    pub map: RescalingMap,
}

/// Rescale a density supported in `[λ, 2λ]` to `[0, 1]`:
/// `f̃(u) = λ f(λu + λ)`, `γ(u) = λ^{-3}[φ(λu+λ) − φ(λ) − λφ'(λ)u]` and
/// `𝓛(y) = (λy₁ + λφ'(λ)y₂, λ³y₂)`, so that `|E f(y)| = |E^γ f̃(𝓛y)|`.
pub fn rescale_curve(lambda: f64, f: &CurveDensity, phase: &Phase1D) -> Result<CurveRescaling> {
    if !(lambda > 0.0 && lambda <= 0.5) {
        return domain_error(format!("scale λ = {lambda} outside (0, 1/2]"));
    }
    let piece = Interval { lo: lambda, hi: 2.0 * lambda };
    if !f.domain().within(&piece, 1e-12) {
        return precondition(format!("density support {} is not inside [λ, 2λ] = {piece}", f.domain()));
    }
    if !piece.within(&phase.domain(), 1e-12) {
        return precondition("phase is not defined on [λ, 2λ]");
    }
    let unit = crate::finitetype::unit_interval();
    let gamma = phase.pullback(lambda.powi(-3), lambda, lambda, unit)?;
    let slope = phase.derivative(1, lambda);
    let map = RescalingMap {
        freq_shift: vec![lambda],
        freq_scale: vec![lambda],
        space: vec![lambda, lambda * slope, 0.0, lambda.powi(3)],
        weight: lambda,
        phase: RescaledPhase::Curve(gamma.clone()),
    };
    Ok(CurveRescaling { density: f.pullback(lambda, lambda, lambda), curve: CurveSpec::new(gamma, unit)?, map })
}

/// Surface data after rescaling a slab to the unit square.
#[derive(Clone, Debug)]
pub struct SurfaceRescaling {
    pub map: RescalingMap,
    pub surface: SurfaceSpec,
    /// Parameter footprint of the slab on the original surface.
    pub footprint: Rect,
}

impl SurfaceRescaling {
    /// `g̃(η) = weight · g(ξ(η))` for `g` restricted to the slab.
    pub fn pull_density(&self, g: &SurfaceDensity) -> Option<SurfaceDensity> {
        let piece = g.restrict(self.footprint)?;
        let m = &self.map;
        Some(piece.pullback(m.weight, (m.freq_scale[0], m.freq_shift[0]), (m.freq_scale[1], m.freq_shift[1])))
    }

    pub fn apply_space(&self, x: &[f64]) -> Vec<f64> {
        self.map.apply_space(x)
    }
}

fn axis_rescale(
    surface: &SurfaceSpec,
    slab: &Slab,
    k: f64,
    a: f64,
    b: f64,
) -> Result<SurfaceRescaling> {
    let v = slab.v.ok_or_else(|| Error::Precondition("surface slab needs a rectangle".into()))?;
    let c = slab.anchor;
    let unit = crate::finitetype::unit_interval();
    let phase1 = surface.phase1().pullback(k, a, c, unit)?;
    let phase2 = surface.phase2().pullback(k, b, v.lo, unit)?;
    let s1 = surface.phase1().derivative(1, c);
    let s2 = surface.phase2().derivative(1, v.lo);
    let sign = surface.sign();
    let map = RescalingMap {
        freq_shift: vec![c, v.lo],
        freq_scale: vec![a, b],
        space: vec![a, 0.0, a * s1, 0.0, b, b * sign * s2, 0.0, 0.0, 1.0 / k],
        weight: a * b,
        phase: RescaledPhase::Surface { phase1: phase1.clone(), phase2: phase2.clone(), sign },
    };
    Ok(SurfaceRescaling {
        surface: SurfaceSpec::new(phase1, phase2, sign, Rect::unit())?,
        map,
        footprint: Rect { u: slab.u, v },
    })
}

/// Rescale a `λ^{-1/2}K^{-1/2} × K^{-1/3}` slab of `Ω_λ ⊆ Ω₁` on a general
/// type-3 surface: `ξ₁ = c + λ^{-1/2}K^{-1/2}η₁`, `ξ₂ = K^{-1/3}η₂`, weight
/// `λ^{-1/2}K^{-5/6}`, new phases `K[φ₁(c + aη) − φ₁(c) − aφ₁'(c)η]` and
/// `Kφ₂(K^{-1/3}η)`.
pub fn rescale_surface_slab_general(surface: &SurfaceSpec, slab: &Slab, lambda: f64, k: f64) -> Result<SurfaceRescaling> {
    let matches = slab.kind == SlabKind::SurfaceTau
        && slab.axis == 0
        && slab.lambda.is_some_and(|l| (l - lambda).abs() <= 1e-12 * lambda)
        && (slab.k - k).abs() <= 1e-12 * k;
    if !matches {
        return precondition("slab is not a surface-tau slab of an Ω₁ piece at this (λ, K)");
    }
    let rescaled = axis_rescale(surface, slab, k, (lambda * k).powf(-0.5), crate::finitetype::cube_root_scale(k))?;
    if !rescaled.footprint.within(&surface.domain(), 1e-12) {
        return precondition("slab lies outside the surface domain");
    }
    Ok(rescaled)
}

/// Slab rescaling for `ξ₁³ ± ξ₂³`. The new phase is
/// `Γ(η) = 3(c/λ)η₁² ± η₂³ + λ^{-3/2}K^{-1/2}η₁³` with `c` the slab start
/// (`c = λ` for the first slab), and `x̃ = (a x₁ + 3c²a x₃, K^{-1/3}x₂, K^{-1}x₃)`.
pub fn rescale_surface_slab(slab: &Slab, lambda: f64, k: f64, sign: f64) -> Result<SurfaceRescaling> {
    rescale_surface_slab_general(&SurfaceSpec::prototypical(sign)?, slab, lambda, k)
}

/// Rescale a `K^{-1/2} × K^{-1/3}` slab of `Ω̃₁` for `φ₁ ± φ₂` with `φ₁` of
/// type 2 and `φ₂` of type 3: `φ̄₁ = Kφ₁(K^{-1/2}·)`, `φ̄₂ = Kφ₂(K^{-1/3}·)`
/// (after removing the linear part at a translated slab), weight `K^{-5/6}`.
pub fn rescale_mixed_slab(slab: &Slab, k: f64, phase1: &Phase1D, phase2: &Phase1D, sign: f64) -> Result<SurfaceRescaling> {
    if classify_finite_type(phase1, phase1.degree()) != Some(2) || classify_finite_type(phase2, phase2.degree()) != Some(3) {
        return precondition("mixed rescaling needs φ₁ of finite type 2 and φ₂ of finite type 3");
    }
    if slab.kind != SlabKind::MixedTau || (slab.k - k).abs() > 1e-12 * k {
        return precondition("slab is not a mixed-tau slab at this K");
    }
    if slab.v.is_none_or(|v| v.lo.abs() > 1e-15) {
        return precondition("mixed slab must start at ξ₂ = 0");
    }
    let unit = crate::finitetype::unit_interval();
    let surface = SurfaceSpec::new(phase1.with_domain(unit)?, phase2.with_domain(unit)?, sign, Rect::unit())?;
    let out = axis_rescale(&surface, slab, k, k.powf(-0.5), crate::finitetype::cube_root_scale(k))?;
    if let RescaledPhase::Surface { phase1, phase2, .. } = &out.map.phase {
        if classify_finite_type(phase1, phase1.degree()) != Some(2) || classify_finite_type(phase2, phase2.degree()) != Some(3) {
            return precondition("rescaled phases lost their finite type on this slab");
        }
    }
    Ok(out)
}

/// Geometry of one piece of the lattice symbol.
#[derive(Clone, Debug)]
pub enum PieceGeometry {
    Curve(CurveSpec),
    Surface(SurfaceSpec),
}

/// One piece of `{(ξ, −ω(ξ))}` near a center `c`: with `ξ = c + s`,
/// `−ω(c + s) = Σ_i amplitude_i·φ_i(s_i) + constant + Σ_i slope_i·s_i`, where the
/// geometry carries the phases `amplitude_i·φ_i`.
#[derive(Clone, Debug)]
pub struct SymbolPiece {
    pub center: Vec<f64>,
    pub geometry: PieceGeometry,
    pub kinds: Vec<PhaseKind>,
    pub amplitudes: Vec<f64>,
    pub constant: f64,
    pub slopes: Vec<f64>,
    /// Finite-type order of each phase, as certified by classification.
    pub orders: Vec<usize>,
    /// `"S1'"` (both type 3), `"S2'"` (mixed) or `"S3'"` (both type 2) for d = 2;
    /// `"type-3"` or `"type-2"` for d = 1.
    pub class: &'static str,
}

impl SymbolPiece {
    /// `−ω(c + s)` reassembled from the piece data.
    pub fn reconstruct(&self, s: &[f64]) -> f64 {
        let height = match &self.geometry {
            PieceGeometry::Curve(c) => c.phase().eval(s[0]),
            PieceGeometry::Surface(x) => x.height(s[0], s[1]),
        };
        height + self.constant + self.slopes.iter().zip(s).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn local_domain(&self) -> Vec<Interval> {
        match &self.geometry {
            PieceGeometry::Curve(c) => vec![c.domain()],
            PieceGeometry::Surface(x) => vec![x.domain().u, x.domain().v],
        }
    }
}

/// `(center, kind, amplitude, constant, slope)` with `−ω₁(c + s) = A·φ(s) + B + C·s`.
fn one_dim_centers() -> [(f64, PhaseKind, f64, f64, f64); 4] {
    use std::f64::consts::{FRAC_PI_2, PI};
    [
        (0.0, PhaseKind::CosMinusOne, 2.0, 0.0, 0.0),
        (FRAC_PI_2, PhaseKind::SinMinusLinear, -2.0, -2.0, -2.0),
        (-FRAC_PI_2, PhaseKind::SinMinusLinear, 2.0, -2.0, 2.0),
        (PI, PhaseKind::CosMinusOne, -2.0, -4.0, 0.0),
    ]
}

/// Split `{(ξ, −ω(ξ))}` into finite-type pieces. Each of the four centers
/// `0, ±π/2, π` carries two half-pieces `s ∈ [−π/4, 0]` and `[0, π/4]`, giving
/// 8 curves for d = 1 and 64 product surfaces for d = 2.
pub fn reduce_lattice_symbol(d: usize) -> Result<Vec<SymbolPiece>> {
    let halves = [Interval { lo: -FRAC_PI_4, hi: 0.0 }, Interval { lo: 0.0, hi: FRAC_PI_4 }];
    let mut atoms = Vec::new();
    for (c, kind, amp, b, slope) in one_dim_centers() {
        for half in halves {
            let phase = Phase1D::from_kind(kind, half)?.pullback(amp, 1.0, 0.0, half)?;
            atoms.push((c, kind, amp, b, slope, half, phase));
        }
    }
    let order = |p: &Phase1D| classify_finite_type(p, p.degree()).unwrap_or(0);
    match d {
        1 => atoms
            .into_iter()
            .map(|(c, kind, amp, b, slope, half, phase)| {
                let n = order(&phase);
                Ok(SymbolPiece {
                    center: vec![c],
                    geometry: PieceGeometry::Curve(CurveSpec::new(phase, half)?),
                    kinds: vec![kind],
                    amplitudes: vec![amp],
                    constant: b,
                    slopes: vec![slope],
                    orders: vec![n],
                    class: if n == 3 { "type-3" } else { "type-2" },
                })
            })
            .collect(),
        2 => {
            let mut out = Vec::new();
            for a in &atoms {
                for bb in &atoms {
                    let (o1, o2) = (order(&a.6), order(&bb.6));
                    let class = match (o1, o2) {
                        (3, 3) => "S1'",
                        (2, 2) => "S3'",
                        _ => "S2'",
                    };
                    out.push(SymbolPiece {
                        center: vec![a.0, bb.0],
                        geometry: PieceGeometry::Surface(SurfaceSpec::new(a.6.clone(), bb.6.clone(), 1.0, Rect { u: a.5, v: bb.5 })?),
                        kinds: vec![a.1, bb.1],
                        amplitudes: vec![a.2, bb.2],
                        constant: a.3 + bb.3,
                        slopes: vec![a.4, bb.4],
                        orders: vec![o1, o2],
                        class,
                    });
                }
            }
            Ok(out)
        }
        _ => domain_error(format!("dimension must be 1 or 2, got {d}")),
    }
}

/// Convenience: grid for a discrete extension reaching `(reach, t)`.
pub fn grid_for_discrete_extension(dim: usize, reach: usize, t: f64) -> Result<TorusGrid> {
    TorusGrid::for_propagation(dim, reach, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finitetype::{decompose_square, slab_cover, symmetric_interval, unit_interval};

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn trivial_values() {
        let cube = Phase1D::monomial(3, symmetric_interval()).unwrap();
        let curve = CurveSpec::new(cube, unit_interval()).unwrap();
        let g = CurveDensity::constant(unit_interval(), one());
        let v = extend_curve(&curve, &g, &[0.0, 0.0], QuadraturePlan::auto()).unwrap();
        assert!((v - one()).norm() < 1e-14);
        let s = SurfaceSpec::prototypical(1.0).unwrap();
        let g = SurfaceDensity::constant(Rect::unit(), one());
        let v = extend_surface(&s, &g, &[0.0; 3], QuadraturePlan::auto()).unwrap();
        assert!((v - one()).norm() < 1e-14);
    }

    #[test]
    fn coarse_plan_reports_required_panels() {
        let cube = Phase1D::monomial(3, symmetric_interval()).unwrap();
        let curve = CurveSpec::new(cube, unit_interval()).unwrap();
        let g = CurveDensity::constant(unit_interval(), one());
        match extend_curve(&curve, &g, &[1000.0, 0.0], QuadraturePlan::fixed(0.5)) {
            Err(Error::Resolution { required, .. }) => assert_eq!(required, 251),
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn prototypical_rescaling_map() {
        let cube = Phase1D::monomial(3, symmetric_interval()).unwrap();
        let f = CurveDensity::constant(Interval { lo: 0.5, hi: 1.0 }, one());
        let r = rescale_curve(0.5, &f, &cube).unwrap();
        assert_eq!(r.map.apply_space(&[1.0, 0.0]), vec![0.5, 0.0]);
        let y = r.map.apply_space(&[0.0, 1.0]);
        assert!((y[0] - 0.375).abs() < 1e-15 && (y[1] - 0.125).abs() < 1e-15);
        let g = r.curve.phase();
        for u in [0.0, 0.3, 1.0] {
            assert!((g.eval(u) - (3.0 * u * u + u * u * u)).abs() < 1e-14);
        }
        assert!(rescale_curve(0.5, &CurveDensity::constant(Interval { lo: 0.2, hi: 1.0 }, one()), &cube).is_err());
    }

    #[test]
    fn surface_slab_coefficients() {
        let regions = decompose_square(64.0).unwrap();
        let piece = regions.iter().find(|r| r.lambda() == Some(0.5) && r.v.unwrap().lo == 0.0 && r.u.lo == 0.5).unwrap();
        let slabs = slab_cover(piece, 64.0, SlabKind::SurfaceTau).unwrap();
        let r = rescale_surface_slab(&slabs[0], 0.5, 64.0, 1.0).unwrap();
        let RescaledPhase::Surface { phase1, phase2, .. } = &r.map.phase else { panic!() };
        assert!((phase1.taylor()[3] - 2f64.powf(1.5) / 8.0).abs() < 1e-14);
        assert!((phase1.taylor()[2] - 3.0).abs() < 1e-14);
        assert!((phase2.taylor()[3] - 1.0).abs() < 1e-14);
        assert!((r.map.weight - 0.5f64.powf(-0.5) * 64f64.powf(-5.0 / 6.0)).abs() < 1e-15);
        // first slab at λ = K^{-1/3} gives cubic coefficient 1
        let low = regions.iter().find(|r| r.lambda() == Some(0.25) && r.u.lo == 0.25).unwrap();
        let slabs = slab_cover(low, 64.0, SlabKind::SurfaceTau).unwrap();
        let r = rescale_surface_slab(&slabs[0], 0.25, 64.0, -1.0).unwrap();
        let RescaledPhase::Surface { phase1, .. } = &r.map.phase else { panic!() };
        assert!((phase1.taylor()[3] - 1.0).abs() < 1e-14);
        assert!(rescale_surface_slab(&slabs[0], 0.5, 64.0, 1.0).is_err());
    }

    #[test]
    fn symbol_pieces_reassemble() {
        let pieces = reduce_lattice_symbol(1).unwrap();
        assert_eq!(pieces.len(), 8);
        let mut orders: Vec<usize> = pieces.iter().map(|p| p.orders[0]).collect();
        orders.sort();
        orders.dedup();
        assert_eq!(orders, vec![2, 3]);
        for p in &pieces {
            for s in [-0.7, -0.2, 0.1, 0.6] {
                if !p.local_domain()[0].contains(s) {
                    continue;
                }
                let xi = p.center[0] + s;
                let omega = 2.0 - 2.0 * xi.cos();
                assert!((p.reconstruct(&[s]) + omega).abs() < 1e-13);
            }
        }
        let surf = reduce_lattice_symbol(2).unwrap();
        assert_eq!(surf.len(), 64);
        assert!(surf.iter().any(|p| p.orders == vec![2, 3]));
        assert!(reduce_lattice_symbol(3).is_err());
    }
}
