//! Finite-type phases, their rescaling algebra, and the frequency-domain
//! decompositions into dyadic regions and slabs.

use std::fmt;

use crate::error::{domain, precondition, Error, Result};

/// Default Maclaurin truncation degree.
///
/// Degree 12 leaves a tail of about `1/13!` for the sine reduction on
/// `[-1, 1]`, which is visible at the `1e-10` agreement tolerance; 16 is not.
pub const DEFAULT_DEGREE: usize = 16;

/// Minimum truncation degree accepted for Taylor data.
pub const MIN_DEGREE: usize = 8;

/// Derivatives at 0 with magnitude at or below this count as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Agreement required between the Taylor evaluator and a closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return domain(format!("empty or invalid interval [{lo}, {hi}]"));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// `self ⊆ other` up to `tol`.
    pub fn within(&self, other: &Interval, tol: f64) -> bool {
        self.lo >= other.lo - tol && self.hi <= other.hi + tol
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub fn unit_interval() -> Interval {
    Interval { lo: 0.0, hi: 1.0 }
}

pub fn symmetric_interval() -> Interval {
    Interval { lo: -1.0, hi: 1.0 }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub u: Interval,
    pub v: Interval,
}

impl Rect {
    pub fn new(u: Interval, v: Interval) -> Self {
        Self { u, v }
    }

    pub fn unit() -> Self {
        Self { u: unit_interval(), v: unit_interval() }
    }

    pub fn area(&self) -> f64 {
        self.u.len() * self.v.len()
    }

    pub fn within(&self, other: &Rect, tol: f64) -> bool {
        self.u.within(&other.u, tol) && self.v.within(&other.v, tol)
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        Some(Rect { u: self.u.intersect(&other.u)?, v: self.v.intersect(&other.v)? })
    }
}

/// Closed-form families for phases and their reductions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhaseKind {
    Cubic,
    Quartic,
    SinMinusLinear,
    CosMinusOne,
}

impl PhaseKind {
    pub fn tag(self) -> &'static str {
        match self {
            PhaseKind::Cubic => "cubic",
            PhaseKind::Quartic => "quartic",
            PhaseKind::SinMinusLinear => "sin-minus-linear",
            PhaseKind::CosMinusOne => "cos-minus-one",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [Self::Cubic, Self::Quartic, Self::SinMinusLinear, Self::CosMinusOne]
            .into_iter()
            .find(|k| k.tag() == tag)
    }

    /// k-th derivative of the base function at `x`.
    pub fn base_derivative(self, k: usize, x: f64) -> f64 {
        match self {
            PhaseKind::Cubic => monomial_derivative(3, k, x),
            PhaseKind::Quartic => monomial_derivative(4, k, x),
            PhaseKind::SinMinusLinear => match k {
                0 => sin_minus_x(x),
                1 => cos_minus_one(x),
                _ => cyclic_sin(k, x),
            },
            PhaseKind::CosMinusOne => match k {
                0 => cos_minus_one(x),
                _ => cyclic_sin(k + 1, x),
            },
        }
    }
}

fn monomial_derivative(n: i32, k: usize, x: f64) -> f64 {
    let k = k as i32;
    if k > n {
        return 0.0;
    }
    let falling: f64 = (0..k).map(|j| (n - j) as f64).product();
    falling * x.powi(n - k)
}

/// `d^k/dx^k sin x`.
fn cyclic_sin(k: usize, x: f64) -> f64 {
    match k % 4 {
        0 => x.sin(),
        1 => x.cos(),
        2 => -x.sin(),
        _ => -x.cos(),
    }
}

fn cos_minus_one(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    -2.0 * s * s
}

fn sin_minus_x(x: f64) -> f64 {
    if x.abs() > 0.5 {
        return x.sin() - x;
    }
    // alternating series keeps full relative accuracy near 0
    let x2 = x * x;
    let mut term = -x * x2 / 6.0;
    let mut sum = term;
    let mut k = 3.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= -x2 / ((k + 1.0) * (k + 2.0));
        sum += term;
        k += 2.0;
    }
    sum
}

/// `scale · base(dilation·t + shift) − offset − slope·t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedForm {
    pub kind: PhaseKind,
    pub scale: f64,
    pub dilation: f64,
    pub shift: f64,
    pub offset: f64,
    pub slope: f64,
}

impl ClosedForm {
    pub fn base(kind: PhaseKind) -> Self {
        Self { kind, scale: 1.0, dilation: 1.0, shift: 0.0, offset: 0.0, slope: 0.0 }
    }

    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        let arg = self.dilation * t + self.shift;
        let core = self.scale * self.dilation.powi(k as i32) * self.kind.base_derivative(k, arg);
        match k {
            0 => core - self.offset - self.slope * t,
            1 => core - self.slope,
            _ => core,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }
}

/// One-variable phase with Maclaurin data and an optional closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct Phase1D {
    taylor: Vec<f64>,
    closed: Option<ClosedForm>,
    domain: Interval,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

fn check_phase_domain(domain: Interval) -> Result<()> {
    if !domain.within(&symmetric_interval(), 1e-12) {
        return domain_err(domain);
    }
    Ok(())
}

fn domain_err(d: Interval) -> Result<()> {
    domain(format!("phase domain {d} must lie in [-1, 1]"))
}

impl Phase1D {
    /// Polynomial phase `Σ a_k t^k` with `a_0 = a_1 = 0`.
    pub fn polynomial(coeffs: &[f64], domain: Interval) -> Result<Self> {
        check_phase_domain(domain)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return crate::error::domain("Taylor coefficients must be finite");
        }
        let a0 = coeffs.first().copied().unwrap_or(0.0);
        let a1 = coeffs.get(1).copied().unwrap_or(0.0);
        if a0.abs() > 1e-12 || a1.abs() > 1e-12 {
            return precondition("phase must vanish to first order at 0 (a0 = a1 = 0)");
        }
        let mut taylor = coeffs.to_vec();
        taylor.resize(taylor.len().max(MIN_DEGREE + 1), 0.0);
        taylor[0] = 0.0;
        taylor[1] = 0.0;
        Ok(Self { taylor, closed: None, domain })
    }

    /// `t ↦ t^n`, n ≥ 2.
    pub fn monomial(n: usize, domain: Interval) -> Result<Self> {
        let mut c = vec![0.0; n.max(MIN_DEGREE) + 1];
        c[n] = 1.0;
        Self::polynomial(&c, domain)
    }

    /// Phase defined by a closed form, with Maclaurin data of degree `degree`
    /// derived from it and checked against it on the domain.
    pub fn from_closed_form(closed: ClosedForm, degree: usize, domain: Interval) -> Result<Self> {
        check_phase_domain(domain)?;
        if degree < MIN_DEGREE {
            return precondition(format!("Taylor degree must be at least {MIN_DEGREE}"));
        }
        let mut taylor: Vec<f64> =
            (0..=degree).map(|m| closed.derivative(m, 0.0) / factorial(m)).collect();
        let scale = taylor.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1.0);
        if taylor[0].abs() > 1e-12 * scale || taylor[1].abs() > 1e-12 * scale {
            return precondition("closed form must vanish to first order at 0");
        }
        taylor[0] = 0.0;
        taylor[1] = 0.0;
        let phase = Self { taylor, closed: Some(closed), domain };
        let gap = phase.closed_form_gap();
        if gap > CLOSED_FORM_TOL {
            return precondition(format!(
                "degree-{degree} Taylor data deviates from the closed form by {gap:e} on {domain}"
            ));
        }
        Ok(phase)
    }

    pub fn from_kind(kind: PhaseKind, domain: Interval) -> Result<Self> {
        Self::from_closed_form(ClosedForm::base(kind), DEFAULT_DEGREE, domain)
    }

    pub fn taylor(&self) -> &[f64] {
        &self.taylor
    }

    pub fn degree(&self) -> usize {
        self.taylor.len() - 1
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed.as_ref()
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Same phase on a different domain (must stay within `[-1, 1]`).
    pub fn with_domain(&self, domain: Interval) -> Result<Self> {
        check_phase_domain(domain)?;
        Ok(Self { domain, ..self.clone() })
    }

    /// k-th derivative of the Taylor polynomial.
    pub fn taylor_derivative(&self, k: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for m in (k..self.taylor.len()).rev() {
            let falling: f64 = (0..k).map(|j| (m - j) as f64).product();
            acc = acc * t + self.taylor[m] * falling;
        }
        acc
    }

    /// k-th derivative, from the closed form when one is present.
    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        match &self.closed {
            Some(c) => c.derivative(k, t),
            None => self.taylor_derivative(k, t),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// Largest `|taylor − closed form|` over a fine sampling of the domain.
    pub fn closed_form_gap(&self) -> f64 {
        let Some(c) = &self.closed else { return 0.0 };
        (0..=256)
            .map(|i| {
                let t = self.domain.lo + self.domain.len() * i as f64 / 256.0;
                (self.taylor_derivative(0, t) - c.value(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Upper estimate of `sup |φ'|` on `interval` from dense sampling.
    pub fn sup_abs_derivative(&self, interval: Interval) -> f64 {
        let n = 512;
        let m = (0..=n)
            .map(|i| self.derivative(1, interval.lo + interval.len() * i as f64 / n as f64).abs())
            .fold(0.0, f64::max);
        // sampling can miss an interior peak by O(h²·sup|φ'''|); pad generously
        m * 1.01 + 1e-12
    }

    /// `ψ(u) = outer·[φ(dilation·u + shift) − φ(shift) − φ'(shift)·dilation·u]`,
    /// the common shape of every affine rescaling of a phase.
    pub fn pullback(&self, outer: f64, dilation: f64, shift: f64, domain: Interval) -> Result<Self> {
        if !(outer.is_finite() && dilation.is_finite() && shift.is_finite()) || dilation == 0.0 {
            return crate::error::domain("pullback parameters must be finite with nonzero dilation");
        }
        match &self.closed {
            Some(c) => {
                let closed = ClosedForm {
                    kind: c.kind,
                    scale: outer * c.scale,
                    dilation: c.dilation * dilation,
                    shift: c.dilation * shift + c.shift,
                    offset: outer * (c.offset + c.slope * shift + self.eval(shift)),
                    slope: outer * (c.slope + self.derivative(1, shift)) * dilation,
                };
                Self::from_closed_form(closed, self.degree(), domain)
            }
            None => {
                let d = self.degree();
                let mut coeffs = vec![0.0; d + 1];
                for (m, slot) in coeffs.iter_mut().enumerate().skip(2) {
                    let s: f64 = (m..=d)
                        .map(|k| self.taylor[k] * binomial(k, m) * shift.powi((k - m) as i32))
                        .sum();
                    *slot = outer * dilation.powi(m as i32) * s;
                }
                Self::polynomial(&coeffs, domain)
            }
        }
    }
}

/// Order of vanishing at 0: the smallest `n ≥ 2` with `|φ^{(n)}(0)| > ZERO_TOL`
/// and all lower derivatives at most `ZERO_TOL`. Orders above the Taylor
/// degree are never reported.
pub fn classify_finite_type(phase: &Phase1D, max_order: usize) -> Option<usize> {
    let top = max_order.min(phase.degree());
    for n in 0..=top {
        let d = phase.taylor[n] * factorial(n);
        if d.abs() > ZERO_TOL {
            return (n >= 2).then_some(n);
        }
    }
    None
}

/// How a phase was normalized: `φ̃(t) = sign·scale·φ(dilation·t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub sign: f64,
    pub scale: f64,
    pub dilation: f64,
}

impl Normalization {
    /// Recover `φ(s)` from `φ̃` evaluated at `s / dilation`.
    pub fn undo(&self, normalized_value: f64) -> f64 {
        normalized_value / (self.sign * self.scale)
    }
}

/// Flip and scale a type-n phase so that its n-th derivative at 0 equals 1.
pub fn normalize_phase(phase: &Phase1D, n: usize) -> Result<(Phase1D, Normalization)> {
    if classify_finite_type(phase, phase.degree()) != Some(n) {
        return precondition(format!("phase is not of finite type {n}"));
    }
    let dn = phase.taylor[n] * factorial(n);
    let record = Normalization { sign: dn.signum(), scale: 1.0 / dn.abs(), dilation: 1.0 };
    let out = phase.pullback(record.sign * record.scale, record.dilation, 0.0, phase.domain)?;
    Ok((out, record))
}

/// Maclaurin data `R_0, …, R_D` of `λ^{-3} φ(λu + λ)` for a type-3 phase:
/// `R_m = Σ_{k ≥ max(m,3)} λ^{k-3} a_k C(k, m)`.
pub fn rescale_taylor(phase: &Phase1D, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda <= 0.5) {
        return domain(format!("scale λ = {lambda} outside (0, 1/2]"));
    }
    if classify_finite_type(phase, phase.degree()) != Some(3) {
        return precondition("rescale_taylor needs a phase of finite type 3");
    }
    let d = phase.degree();
    Ok((0..=d)
        .map(|m| {
            (m.max(3)..=d)
                .map(|k| lambda.powi(k as i32 - 3) * phase.taylor[k] * binomial(k, m))
                .sum()
        })
        .collect())
}

/// `η ↦ K·φ(K^{-1/n} η)`, which keeps the finite-type order `n ∈ {2, 3}`.
pub fn finite_type_closure_rescale(phase: &Phase1D, n: usize, k: f64) -> Result<Phase1D> {
    if !(k.is_finite() && k >= 1.0) {
        return domain(format!("K = {k} must be at least 1"));
    }
    if !(n == 2 || n == 3) || classify_finite_type(phase, phase.degree()) != Some(n) {
        return precondition(format!("phase is not of finite type {n} with n in {{2, 3}}"));
    }
    let out = phase.pullback(k, k.powf(-1.0 / n as f64), 0.0, phase.domain)?;
    if classify_finite_type(&out, out.degree()) != Some(n) {
        return Err(Error::Precondition(format!("rescaled phase lost finite type {n}")));
    }
    Ok(out)
}

/// Parsed line of a phase corpus file.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRecord {
    pub name: String,
    pub coeffs: Vec<f64>,
    pub tag: Option<PhaseKind>,
}

/// Parse a phase corpus: one record per line, `name | a0 a1 a2 … | tag`,
/// where the tag field is optional and `#` starts a comment.
pub fn parse_phase_corpus(text: &str) -> Result<Vec<PhaseRecord>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        let bad = |msg: &str| Error::Domain(format!("phase corpus line {}: {msg}", lineno + 1));
        if fields.len() < 2 || fields.len() > 3 || fields[0].is_empty() {
            return Err(bad("expected `name | coefficients [| tag]`"));
        }
        let coeffs = fields[1]
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| bad(&format!("bad coefficient `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        let tag = match fields.get(2) {
            Some(t) if !t.is_empty() => {
                Some(PhaseKind::from_tag(t).ok_or_else(|| bad(&format!("unknown tag `{t}`")))?)
            }
            _ => None,
        };
        out.push(PhaseRecord { name: fields[0].to_string(), coeffs, tag });
    }
    Ok(out)
}

impl PhaseRecord {
    /// Build the phase on `domain`. A tag selects the closed-form family, scaled
    /// to match the leading coefficient; the listed coefficients must then agree
    /// with that family's Maclaurin data.
    pub fn to_phase(&self, domain: Interval) -> Result<Phase1D> {
        let Some(kind) = self.tag else {
            return Phase1D::polynomial(&self.coeffs, domain);
        };
        let base = Phase1D::from_kind(kind, domain)?;
        let lead = (2..base.taylor.len())
            .find(|&m| base.taylor[m] != 0.0)
            .ok_or_else(|| Error::Domain("closed form has no leading term".into()))?;
        let given = self.coeffs.get(lead).copied().unwrap_or(0.0);
        if given == 0.0 {
            return precondition(format!("record {} lacks the leading coefficient", self.name));
        }
        let scale = given / base.taylor[lead];
        let phase = base.pullback(scale, 1.0, 0.0, domain)?;
        for (m, c) in self.coeffs.iter().enumerate() {
            let expect = phase.taylor.get(m).copied().unwrap_or(0.0);
            if (c - expect).abs() > 1e-12 * expect.abs().max(1.0) {
                return precondition(format!(
                    "record {}: coefficient a{m} = {c} disagrees with tag {}",
                    self.name,
                    kind.tag()
                ));
            }
        }
        Ok(phase)
    }
}

/// Which piece of a decomposition a region is.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegionLabel {
    /// Non-degenerate part.
    Omega0,
    /// Doubly degenerate corner square.
    Omega3,
    /// Dyadic piece at scale λ; `axis` 0 lies in Ω₁ (or the curve's positive
    /// side), axis 1 in Ω₂.
    OmegaLambda { lambda: f64, axis: usize },
    /// Non-degenerate part of the mixed-type square.
    TildeOmega0,
    /// Degenerate strip of the mixed-type square.
    TildeOmega1,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionLabel::Omega0 => write!(f, "Omega0"),
            RegionLabel::Omega3 => write!(f, "Omega3"),
            RegionLabel::OmegaLambda { lambda, axis } => {
                write!(f, "Omega_lambda(lambda={lambda},axis={axis})")
            }
            RegionLabel::TildeOmega0 => write!(f, "TildeOmega0"),
            RegionLabel::TildeOmega1 => write!(f, "TildeOmega1"),
        }
    }
}

/// A piece of `[0,1]²` (or an interval of `[-1,1]` when `v` is `None`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub label: RegionLabel,
    pub u: Interval,
    pub v: Option<Interval>,
    /// Decomposition parameter the region was built for.
    pub k: f64,
    /// Set when the outermost dyadic piece was stretched to reach the boundary
    /// because `K` is not a power of 8.
    pub clamped: bool,
}

impl Region {
    pub fn measure(&self) -> f64 {
        self.u.len() * self.v.map_or(1.0, |v| v.len())
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.label {
            RegionLabel::OmegaLambda { lambda, .. } => Some(lambda),
            _ => None,
        }
    }

    pub fn rect(&self) -> Option<Rect> {
        self.v.map(|v| Rect { u: self.u, v })
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 8.0) {
        return domain(format!("K = {k} must be at least 8"));
    }
    Ok(())
}

/// `K^{-1/3}` computed so that powers of 8 give exact dyadic values.
pub fn cube_root_scale(k: f64) -> f64 {
    (-k.log2() / 3.0).exp2()
}

/// Dyadic scales `λ_j = 2^{j-1} K^{-1/3}`, `1 ≤ j ≤ ⌊log₂K / 3⌋`, plus the clamp flag.
pub fn dyadic_scales(k: f64) -> (Vec<f64>, bool) {
    let s = cube_root_scale(k);
    let count = (k.log2() / 3.0 + 1e-12).floor() as i32;
    let lambdas: Vec<f64> = (1..=count).map(|j| (j - 1) as f64).map(|e| e.exp2() * s).collect();
    let top = 2.0 * lambdas.last().copied().unwrap_or(s);
    (lambdas, (top - 1.0).abs() > 1e-12)
}

fn dyadic_piece(lambda: f64, last: bool) -> Interval {
    let hi = if last { 1.0 } else { 2.0 * lambda };
    Interval { lo: lambda, hi }
}

/// Ω₀ = [s,1]², Ω₃ = [0,s]², and the dyadic pieces Ω_λ = [λ,2λ]×[0,s] of Ω₁
/// together with their mirror images in Ω₂, where `s = K^{-1/3}`.
pub fn decompose_square(k: f64) -> Result<Vec<Region>> {
    check_k(k)?;
    let s = cube_root_scale(k);
    let (lambdas, clamped) = dyadic_scales(k);
    let strip = Interval { lo: 0.0, hi: s };
    let mut out = vec![
        Region { label: RegionLabel::Omega0, u: Interval { lo: s, hi: 1.0 }, v: Some(Interval { lo: s, hi: 1.0 }), k, clamped: false },
        Region { label: RegionLabel::Omega3, u: strip, v: Some(strip), k, clamped: false },
    ];
    for axis in 0..2 {
        for (j, &lambda) in lambdas.iter().enumerate() {
            let last = j + 1 == lambdas.len();
            let piece = dyadic_piece(lambda, last);
            let (u, v) = if axis == 0 { (piece, strip) } else { (strip, piece) };
            out.push(Region {
                label: RegionLabel::OmegaLambda { lambda, axis },
                u,
                v: Some(v),
                k,
                clamped: last && clamped,
            });
        }
    }
    Ok(out)
}

/// Ω₀ = [−s, s] and Ω^±_λ = ±[λ, 2λ] covering `[-1, 1]`.
pub fn decompose_interval(k: f64) -> Result<Vec<Region>> {
    check_k(k)?;
    let s = cube_root_scale(k);
    let (lambdas, clamped) = dyadic_scales(k);
    let mut out = vec![Region { label: RegionLabel::Omega0, u: Interval { lo: -s, hi: s }, v: None, k, clamped: false }];
    for axis in 0..2 {
        for (j, &lambda) in lambdas.iter().enumerate() {
            let last = j + 1 == lambdas.len();
            let piece = dyadic_piece(lambda, last);
            let u = if axis == 0 { piece } else { Interval { lo: -piece.hi, hi: -piece.lo } };
            out.push(Region { label: RegionLabel::OmegaLambda { lambda, axis }, u, v: None, k, clamped: last && clamped });
        }
    }
    Ok(out)
}

/// Ω̃₁ = [0,1]×[0,K^{-1/3}] and Ω̃₀ = [0,1]×[K^{-1/3},1] for mixed-type surfaces.
pub fn decompose_mixed_square(k: f64) -> Result<Vec<Region>> {
    check_k(k)?;
    let s = cube_root_scale(k);
    Ok(vec![
        Region { label: RegionLabel::TildeOmega0, u: unit_interval(), v: Some(Interval { lo: s, hi: 1.0 }), k, clamped: false },
        Region { label: RegionLabel::TildeOmega1, u: unit_interval(), v: Some(Interval { lo: 0.0, hi: s }), k, clamped: false },
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlabKind {
    /// `λ^{-1/2}K^{-1/2} × K^{-1}` curve slabs.
    CurveTheta,
    /// `λ^{-1/2}K^{-1/2} × K^{-1/3}` surface slabs.
    SurfaceTau,
    /// `K^{-1/2} × K^{-1/3}` mixed-type slabs.
    MixedTau,
}

impl SlabKind {
    pub fn tag(self) -> &'static str {
        match self {
            SlabKind::CurveTheta => "curve-theta",
            SlabKind::SurfaceTau => "surface-tau",
            SlabKind::MixedTau => "mixed-tau",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [Self::CurveTheta, Self::SurfaceTau, Self::MixedTau].into_iter().find(|k| k.tag() == tag)
    }
}

/// A tile of a region's parameter footprint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slab {
    pub kind: SlabKind,
    pub u: Interval,
    pub v: Option<Interval>,
    /// Nominal side lengths before any clamping at the region boundary.
    pub sides: (f64, f64),
    /// Start of the slab along its tiled axis, on the side nearest the origin.
    pub anchor: f64,
    /// Axis along which the region was tiled (0 = u, 1 = v).
    pub axis: usize,
    pub lambda: Option<f64>,
    pub k: f64,
}

impl Slab {
    pub fn rect(&self) -> Option<Rect> {
        self.v.map(|v| Rect { u: self.u, v })
    }

    pub fn measure(&self) -> f64 {
        self.u.len() * self.v.map_or(1.0, |v| v.len())
    }
}

/// Split `[inner, outer]` (either orientation) into pieces of width `w`
/// starting at `inner`; the last piece is clamped to `outer`.
fn tile(inner: f64, outer: f64, w: f64) -> Vec<Interval> {
    let len = (outer - inner).abs();
    let count = ((len / w) - 1e-9).ceil().max(1.0) as usize;
    let dir = if outer >= inner { 1.0 } else { -1.0 };
    (0..count)
        .map(|i| {
            let a = inner + dir * w * i as f64;
            let b = if i + 1 == count { outer } else { inner + dir * w * (i + 1) as f64 };
            Interval { lo: a.min(b), hi: a.max(b) }
        })
        .collect()
}

/// Tile a region with slabs of the given kind.
pub fn slab_cover(region: &Region, k: f64, kind: SlabKind) -> Result<Vec<Slab>> {
    if !(k.is_finite() && k > 0.0) || (region.k - k).abs() > 1e-12 * k {
        return precondition(format!("region built for K = {} used with K = {k}", region.k));
    }
    let s = cube_root_scale(k);
    match (kind, region.label, region.v) {
        (SlabKind::CurveTheta, RegionLabel::OmegaLambda { lambda, axis }, None) => {
            let w = (lambda * k).powf(-0.5);
            let (inner, outer) = if axis == 0 { (region.u.lo, region.u.hi) } else { (region.u.hi, region.u.lo) };
            Ok(tile(inner, outer, w)
                .into_iter()
                .map(|u| Slab {
                    kind,
                    u,
                    v: None,
                    sides: (w, 1.0 / k),
                    anchor: if axis == 0 { u.lo } else { u.hi },
                    axis: 0,
                    lambda: Some(lambda),
                    k,
                })
                .collect())
        }
        (SlabKind::SurfaceTau, RegionLabel::OmegaLambda { lambda, axis }, Some(v)) => {
            let w = (lambda * k).powf(-0.5);
            let along = if axis == 0 { region.u } else { v };
            let across = if axis == 0 { v } else { region.u };
            Ok(tile(along.lo, along.hi, w)
                .into_iter()
                .map(|piece| {
                    let (u, v) = if axis == 0 { (piece, across) } else { (across, piece) };
                    Slab { kind, u, v: Some(v), sides: (w, s), anchor: piece.lo, axis, lambda: Some(lambda), k }
                })
                .collect())
        }
        (SlabKind::MixedTau, RegionLabel::TildeOmega1, Some(v)) => {
            let w = k.powf(-0.5);
            Ok(tile(region.u.lo, region.u.hi, w)
                .into_iter()
                .map(|u| Slab { kind, u, v: Some(v), sides: (w, s), anchor: u.lo, axis: 0, lambda: None, k })
                .collect())
        }
        _ => precondition(format!("slab kind {} does not apply to region {}", kind.tag(), region.label)),
    }
}

/// The phase data carried by a rescaling.
#[derive(Clone, Debug, PartialEq)]
pub enum RescaledPhase {
    Curve(Phase1D),
    Surface { phase1: Phase1D, phase2: Phase1D, sign: f64 },
}

/// Change of variables connecting an extension operator over a piece to one
/// over the unit parameter domain.
#[derive(Clone, Debug, PartialEq)]
pub struct RescalingMap {
    /// Original parameter `ξ_i = freq_shift[i] + freq_scale[i]·η_i`.
    pub freq_shift: Vec<f64>,
    pub freq_scale: Vec<f64>,
    /// Row-major square matrix taking original space variables to new ones.
    pub space: Vec<f64>,
    /// New density is `weight · g(ξ(η))`.
    pub weight: f64,
    pub phase: RescaledPhase,
}

impl RescalingMap {
    pub fn space_dim(&self) -> usize {
        (self.space.len() as f64).sqrt().round() as usize
    }

    pub fn apply_space(&self, x: &[f64]) -> Vec<f64> {
        let n = self.space_dim();
        (0..n).map(|r| (0..n).map(|c| self.space[r * n + c] * x[c]).sum()).collect()
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.space;
        match self.space_dim() {
            2 => m[0] * m[3] - m[1] * m[2],
            3 => {
                m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                    + m[2] * (m[3] * m[7] - m[4] * m[6])
            }
            _ => f64::NAN,
        }
    }

    pub fn to_original(&self, eta: &[f64]) -> Vec<f64> {
        eta.iter().enumerate().map(|(i, e)| self.freq_shift[i] + self.freq_scale[i] * e).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym() -> Interval {
        symmetric_interval()
    }

    #[test]
    fn classification_examples() {
        let cubic = Phase1D::monomial(3, sym()).unwrap();
        assert_eq!(classify_finite_type(&cubic, 8), Some(3));
        let s = Phase1D::from_kind(PhaseKind::SinMinusLinear, sym()).unwrap();
        assert_eq!(classify_finite_type(&s, 8), Some(3));
        let c = Phase1D::from_kind(PhaseKind::CosMinusOne, sym()).unwrap();
        assert_eq!(classify_finite_type(&c, 8), Some(2));
        let q = Phase1D::from_kind(PhaseKind::Quartic, sym()).unwrap();
        assert_eq!(classify_finite_type(&q, 3), None);
        assert_eq!(classify_finite_type(&q, 8), Some(4));
    }

    #[test]
    fn normalization_examples() {
        let cubic = Phase1D::monomial(3, sym()).unwrap();
        let (n, rec) = normalize_phase(&cubic, 3).unwrap();
        assert!((rec.scale - 1.0 / 6.0).abs() < 1e-15);
        assert!((n.taylor_derivative(3, 0.0) - 1.0).abs() < 1e-14);
        let s = Phase1D::from_kind(PhaseKind::SinMinusLinear, sym()).unwrap();
        let (n, rec) = normalize_phase(&s, 3).unwrap();
        assert_eq!((rec.sign, rec.scale), (-1.0, 1.0));
        assert!((n.derivative(3, 0.0) - 1.0).abs() < 1e-14);
        let c = Phase1D::from_kind(PhaseKind::CosMinusOne, sym()).unwrap();
        let (n, rec) = normalize_phase(&c, 2).unwrap();
        assert_eq!((rec.sign, rec.scale), (-1.0, 1.0));
        assert!((n.derivative(2, 0.0) - 1.0).abs() < 1e-14);
        assert!(normalize_phase(&c, 3).is_err());
    }

    #[test]
    fn cubic_rescale_coefficients() {
        let cubic = Phase1D::monomial(3, sym()).unwrap();
        for lambda in [0.5, 0.25, 0.01] {
            let r = rescale_taylor(&cubic, lambda).unwrap();
            assert_eq!(&r[..5], &[1.0, 3.0, 3.0, 1.0, 0.0]);
        }
        assert!(matches!(rescale_taylor(&cubic, 0.75), Err(Error::Domain(_))));
        let c = Phase1D::from_kind(PhaseKind::CosMinusOne, sym()).unwrap();
        assert!(matches!(rescale_taylor(&c, 0.25), Err(Error::Precondition(_))));
    }

    #[test]
    fn closure_rescale_fixed_points() {
        let cubic = Phase1D::monomial(3, sym()).unwrap();
        let sq = Phase1D::monomial(2, sym()).unwrap();
        for k in [1.0, 8.0, 1e3] {
            let r = finite_type_closure_rescale(&cubic, 3, k).unwrap();
            for t in [-1.0, 0.3, 1.0] {
                assert!((r.eval(t) - t * t * t).abs() < 1e-12);
            }
            let r = finite_type_closure_rescale(&sq, 2, k).unwrap();
            assert!((r.eval(0.7) - 0.49).abs() < 1e-12);
        }
    }

    #[test]
    fn square_decomposition_examples() {
        let r = decompose_square(8.0).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r[0].u, Interval { lo: 0.5, hi: 1.0 });
        assert_eq!(r[1].u, Interval { lo: 0.0, hi: 0.5 });
        assert_eq!(r[2].lambda(), Some(0.5));
        let r = decompose_square(64.0).unwrap();
        let lambdas: Vec<f64> = r.iter().filter_map(|x| x.lambda()).collect();
        assert_eq!(lambdas, vec![0.25, 0.5, 0.25, 0.5]);
        assert!(decompose_square(7.0).is_err());
    }

    #[test]
    fn non_power_of_eight_is_clamped() {
        let r = decompose_square(100.0).unwrap();
        let total: f64 = r.iter().map(Region::measure).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(r.iter().any(|x| x.clamped));
        assert!(decompose_square(512.0).unwrap().iter().all(|x| !x.clamped));
    }

    #[test]
    fn interval_decomposition_examples() {
        let r = decompose_interval(8.0).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].u, Interval { lo: -0.5, hi: 0.5 });
        assert_eq!(r[1].u, Interval { lo: 0.5, hi: 1.0 });
        assert_eq!(r[2].u, Interval { lo: -1.0, hi: -0.5 });
        assert_eq!(decompose_interval(64.0).unwrap().len(), 5);
    }

    #[test]
    fn slab_examples() {
        let regions = decompose_square(8.0).unwrap();
        let slabs = slab_cover(&regions[2], 8.0, SlabKind::SurfaceTau).unwrap();
        assert_eq!(slabs.len(), 1);
        assert!((slabs[0].sides.0 - 0.5).abs() < 1e-15);
        let mixed = decompose_mixed_square(64.0).unwrap();
        let slabs = slab_cover(&mixed[1], 64.0, SlabKind::MixedTau).unwrap();
        assert_eq!(slabs.len(), 8);
        assert_eq!(slabs[0].sides, (0.125, 0.25));
        assert!(slab_cover(&regions[2], 64.0, SlabKind::SurfaceTau).is_err());
        assert!(slab_cover(&regions[0], 8.0, SlabKind::SurfaceTau).is_err());
    }

    #[test]
    fn corpus_parsing() {
        let text = "# test\ncube | 0 0 0 1\nsine | 0 0 0 -0.16666666666666666 0 0.008333333333333333 | sin-minus-linear\n";
        let recs = parse_phase_corpus(text).unwrap();
        assert_eq!(recs.len(), 2);
        let p = recs[1].to_phase(sym()).unwrap();
        assert!((p.eval(0.5) - (0.5f64.sin() - 0.5)).abs() < 1e-15);
        assert!(parse_phase_corpus("x | 0 0 a").is_err());
        assert!(parse_phase_corpus("x | 0 0 1 | bogus").is_err());
    }
}
