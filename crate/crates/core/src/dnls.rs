//! The discrete nonlinear Schrödinger equation
//! `i∂_t u + Δu = μ|u|^{α-1}u`, `u(0) = f` on `ℤ^d`.
//!
//! Both solvers work on the periodic lattice `ℤ_M^d` of a [`TorusGrid`] and
//! report fields on the window of the initial data. The grid must satisfy the
//! propagation rule for that window and horizon, and the window should leave
//! room for the group velocity 2 so that nothing reaches its edge.
//!
//! The Picard solver iterates the Duhamel map in the interaction picture:
//! `e^{-itΔ}Φ(u)(t) = f - iμ ∫_0^t e^{-isΔ} N(u(s)) ds`, with the linear flow
//! applied exactly as a Fourier multiplier and the time integral by cumulative
//! composite Simpson. The split-step solver is Strang splitting with the exact
//! nonlinear phase rotation.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{conjugate, dnls_exponent_region, mixed_norm};
use crate::error::{domain, precondition, Error, Result};
use crate::lattice::{
    check_propagation, fft_periodic, from_periodic, propagation_modes, to_periodic, LatticeField, TorusGrid, C64,
};
use crate::qmc::{mix_seed, pairwise_sum};

/// Fewest time steps a solve accepts.
pub const MIN_STEPS: usize = 16;

/// Initial-value problem for the lattice NLS.
#[derive(Clone, Debug, PartialEq)]
pub struct DnlsProblem {
    alpha: f64,
    mu: f64,
    initial: LatticeField,
    p: f64,
    q: f64,
}

impl DnlsProblem {
    /// `α > 1`, `μ = ±1`, and well-posedness exponents `(p, q)` inside the
    /// region for `d` with either `α = p` or `α < p ≤ α q'`.
    pub fn new(alpha: f64, mu: f64, initial: LatticeField, p: f64, q: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return domain(format!("nonlinearity power α = {alpha} must exceed 1"));
        }
        if mu != 1.0 && mu != -1.0 {
            return domain(format!("coupling μ = {mu} must be ±1"));
        }
        if !dnls_exponent_region(initial.dim(), p, q) {
            return domain(format!("exponents (p, q) = ({p}, {q}) lie outside the d = {} region", initial.dim()));
        }
        let critical = (alpha - p).abs() <= 1e-12 * p;
        if !(critical || (alpha < p && p <= alpha * conjugate(q) * (1.0 + 1e-12))) {
            return domain(format!("need α = p or α < p ≤ α q'; got α = {alpha}, p = {p}, q = {q}"));
        }
        Ok(Self { alpha, mu, initial, p, q })
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn initial(&self) -> &LatticeField {
        &self.initial
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Same problem with different initial data.
    pub fn with_initial(&self, initial: LatticeField) -> Result<Self> {
        Self::new(self.alpha, self.mu, initial, self.p, self.q)
    }
}

/// Time grid and iteration controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    /// End time; negative values solve backwards.
    pub horizon: f64,
    pub steps: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub grid: TorusGrid,
}

impl SolveConfig {
    pub fn new(horizon: f64, steps: usize, tolerance: f64, max_iterations: usize, grid: TorusGrid) -> Result<Self> {
        let c = Self { horizon, steps, tolerance, max_iterations, grid };
        c.validate()?;
        Ok(c)
    }

    /// Config on the smallest power-of-two grid that resolves the problem's window.
    pub fn for_problem(problem: &DnlsProblem, horizon: f64, steps: usize, tolerance: f64) -> Result<Self> {
        let grid = TorusGrid::for_propagation(problem.dim(), problem.initial.radius(), horizon)?;
        Self::new(horizon, steps, tolerance, 32, grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon != 0.0) {
            return domain(format!("horizon {} must be finite and nonzero", self.horizon));
        }
        if self.steps < MIN_STEPS {
            return domain(format!("{} time steps requested, at least {MIN_STEPS} required", self.steps));
        }
        if !(self.tolerance > 0.0) {
            return domain("Picard tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return domain("at least one Picard iteration is required");
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.horizon * n as f64 / self.steps as f64).collect()
    }
}

/// Lattice fields at the nodes of a time grid running from 0 to the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionPath {
    times: Vec<f64>,
    fields: Vec<LatticeField>,
    grid: TorusGrid,
    /// ℓ² norm of the solver state at each node: the full periodic lattice
    /// for split-step, the window otherwise.
    mass: Vec<f64>,
}

impl SolutionPath {
    pub fn new(times: Vec<f64>, fields: Vec<LatticeField>, grid: TorusGrid) -> Result<Self> {
        if times.len() != fields.len() || times.len() < 2 {
            return precondition("a path needs matching times and fields, at least two of each");
        }
        let increasing = times.windows(2).all(|w| w[1] > w[0]);
        let decreasing = times.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) || times[0] != 0.0 {
            return precondition("path times must run monotonically from 0");
        }
        let (d, r) = (fields[0].dim(), fields[0].radius());
        if fields.iter().any(|f| f.dim() != d || f.radius() != r) {
            return precondition("path fields must share dimension and window");
        }
        if d != grid.dim() {
            return precondition("path grid dimension differs from its fields");
        }
        let mass = fields.iter().map(|f| f.norm_l2()).collect();
        Ok(Self { times, fields, grid, mass })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[LatticeField] {
        &self.fields
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Nodewise difference of two paths on the same grid.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.times != other.times {
            return precondition("paths live on different time grids");
        }
        let fields = self.fields.iter().zip(&other.fields).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Self::new(self.times.clone(), fields, self.grid)
    }

    pub fn scale(&self, c: C64) -> Self {
        let fields: Vec<LatticeField> = self.fields.iter().map(|f| f.scale(c)).collect();
        let mass = fields.iter().map(|f| f.norm_l2()).collect();
        Self { fields, mass, ..self.clone() }
    }

    /// Largest ℓ² distance between matching nodes.
    pub fn sup_l2_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.fields.iter().map(|f| f.norm_l2()).fold(0.0, f64::max))
    }
}

/// `μ|u|^{α-1}u` pointwise, with `0 ↦ 0`.
pub fn nonlinearity(u: &LatticeField, alpha: f64, mu: f64) -> Result<LatticeField> {
    if !(alpha > 1.0) {
        return domain(format!("nonlinearity power α = {alpha} must exceed 1"));
    }
    let values = u.values().iter().map(|&z| nonlinear_value(z, alpha, mu)).collect();
    LatticeField::from_values(u.dim(), u.radius(), values)
}

fn nonlinear_value(z: C64, alpha: f64, mu: f64) -> C64 {
    let m2 = z.norm_sqr();
    if m2 == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let e = alpha - 1.0;
    let factor = if e.fract() == 0.0 && (e as i64) % 2 == 0 {
        m2.powi((e as i32) / 2)
    } else {
        (0.5 * e * m2.ln()).exp()
    };
    z * (mu * factor)
}

/// FFT plumbing on the periodic lattice; bin `k` has frequency `2πk/M`.
struct Engine {
    m: usize,
    dim: usize,
    radius: usize,
    omega: Vec<f64>,
}

impl Engine {
    fn new(grid: TorusGrid, radius: usize) -> Self {
        let m = grid.modes();
        let w1: Vec<f64> = (0..m).map(|k| 4.0 * (PI * k as f64 / m as f64).sin().powi(2)).collect();
        let omega = if grid.dim() == 1 {
            w1
        } else {
            (0..m * m).map(|i| w1[i / m] + w1[i % m]).collect()
        };
        Self { m, dim: grid.dim(), radius, omega }
    }

    fn len(&self) -> usize {
        self.omega.len()
    }

    fn forward(&self, mut data: Vec<C64>) -> Vec<C64> {
        fft_periodic(&mut data, self.m, self.dim, false);
        data
    }

    fn backward(&self, mut data: Vec<C64>) -> Vec<C64> {
        fft_periodic(&mut data, self.m, self.dim, true);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
        data
    }

    fn spectrum(&self, u: &LatticeField) -> Vec<C64> {
        self.forward(to_periodic(u, self.m))
    }

    fn field(&self, spec: Vec<C64>) -> LatticeField {
        from_periodic(&self.backward(spec), self.m, self.dim, self.radius)
    }

    /// Multiply by `e^{-itω}` (the flow `e^{itΔ}`).
    fn flow(&self, spec: &mut [C64], t: f64) {
        for (z, w) in spec.iter_mut().zip(&self.omega) {
            *z *= C64::from_polar(1.0, -t * w);
        }
    }

    /// `‖𝓕u‖_{L^s}` under the normalized measure, from a spectrum.
    fn spectral_norm(&self, spec: &[C64], s: f64) -> f64 {
        if s.is_infinite() {
            return spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        let v: Vec<f64> = spec.iter().map(|z| z.norm().powf(s)).collect();
        (pairwise_sum(&v) / spec.len() as f64).powf(1.0 / s)
    }
}

fn resolution_check(radius: usize, horizon: f64, grid: TorusGrid) -> Result<()> {
    check_propagation(radius, horizon, grid).map_err(|_| Error::Resolution {
        what: format!("lattice flow of window radius {radius} to t = {horizon}"),
        required: propagation_modes(radius, horizon),
    })
}

/// `‖u‖_X = ‖u‖_{L^p(I; ℓ^p)} + sup_t ‖u(t)‖_{L̂^{q'}}`.
pub fn x_norm(path: &SolutionPath, problem: &DnlsProblem) -> Result<f64> {
    let engine = Engine::new(path.grid, path.fields[0].radius());
    let (a, b) = {
        let t = path.horizon();
        (t.min(0.0), t.max(0.0))
    };
    let space_time = mixed_norm(path, problem.p, problem.p, (a, b))?;
    let sup = path
        .fields
        .iter()
        .map(|u| engine.spectral_norm(&engine.spectrum(u), problem.q))
        .fold(0.0, f64::max);
    Ok(space_time + sup)
}

/// Cumulative composite Simpson integrals `I_n = ∫_{t_0}^{t_n} G` of vector
/// samples on a uniform grid with signed step `h`. Odd nodes add one step by
/// the three-point rule through the neighbouring nodes.
fn cumulative_simpson(g: &[Vec<C64>], h: f64) -> Vec<Vec<C64>> {
    let s = g.len() - 1;
    let len = g[0].len();
    let mut out = vec![vec![C64::new(0.0, 0.0); len]; s + 1];
    let comb = |acc: &[C64], terms: &[(f64, &Vec<C64>)]| -> Vec<C64> {
        (0..len).map(|i| acc[i] + terms.iter().map(|(c, v)| v[i] * *c).sum::<C64>()).collect()
    };
    for n in 1..=s {
        out[n] = if n % 2 == 0 {
            comb(&out[n - 2], &[(h / 3.0, &g[n - 2]), (4.0 * h / 3.0, &g[n - 1]), (h / 3.0, &g[n])])
        } else if n < s {
            comb(&out[n - 1], &[(5.0 * h / 12.0, &g[n - 1]), (8.0 * h / 12.0, &g[n]), (-h / 12.0, &g[n + 1])])
        } else {
            comb(&out[n - 1], &[(-h / 12.0, &g[n - 2]), (8.0 * h / 12.0, &g[n - 1]), (5.0 * h / 12.0, &g[n])])
        };
    }
    out
}

/// Interaction-picture integrand `e^{isω} 𝓕N(u(s))` at every node.
fn interaction_integrand(engine: &Engine, path: &SolutionPath, problem: &DnlsProblem) -> Vec<Vec<C64>> {
    (0..path.len())
        .into_par_iter()
        .map(|n| {
            let nl: Vec<C64> = to_periodic(&path.fields[n], engine.m)
                .into_iter()
                .map(|z| nonlinear_value(z, problem.alpha, problem.mu))
                .collect();
            let mut spec = engine.forward(nl);
            engine.flow(&mut spec, -path.times[n]);
            spec
        })
        .collect()
}

fn check_path(u: &SolutionPath, problem: &DnlsProblem, config: &SolveConfig) -> Result<()> {
    config.validate()?;
    let times = config.times();
    if u.times.len() != times.len() || u.times.iter().zip(&times).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0)) {
        return precondition("path is not on the config's time grid");
    }
    if u.fields[0].dim() != problem.dim() || u.fields[0].radius() != problem.initial.radius() {
        return precondition("path window differs from the initial data's");
    }
    if u.grid != config.grid {
        return precondition("path was computed on a different grid");
    }
    Ok(())
}

/// The solution map `Φ(u)(t) = e^{itΔ}f - iμ ∫_0^t e^{i(t-s)Δ} N(u(s)) ds` on the
/// config's time grid.
pub fn duhamel_map(u: &SolutionPath, problem: &DnlsProblem, config: &SolveConfig) -> Result<SolutionPath> {
    check_path(u, problem, config)?;
    resolution_check(problem.initial.radius(), config.horizon, config.grid)?;
    let engine = Engine::new(config.grid, problem.initial.radius());
    Ok(duhamel_unchecked(&engine, u, problem, config))
}

fn duhamel_unchecked(engine: &Engine, u: &SolutionPath, problem: &DnlsProblem, config: &SolveConfig) -> SolutionPath {
    let g = interaction_integrand(engine, u, problem);
    let integral = cumulative_simpson(&g, config.step());
    let f_hat = engine.spectrum(&problem.initial);
    // the integrand already carries μ
    let c = C64::new(0.0, -1.0);
    let fields: Vec<LatticeField> = (0..u.len())
        .into_par_iter()
        .map(|n| {
            let mut spec: Vec<C64> = f_hat.iter().zip(&integral[n]).map(|(f, i)| f + c * i).collect();
            engine.flow(&mut spec, u.times[n]);
            engine.field(spec)
        })
        .collect();
    SolutionPath::new(u.times.clone(), fields, config.grid).expect("grid and window already checked")
}

/// Free evolution of `f` sampled on the config's time grid.
pub fn linear_path(f: &LatticeField, config: &SolveConfig) -> Result<SolutionPath> {
    config.validate()?;
    if f.dim() != config.grid.dim() {
        return precondition("field dimension differs from grid dimension");
    }
    resolution_check(f.radius(), config.horizon, config.grid)?;
    let engine = Engine::new(config.grid, f.radius());
    Ok(linear_unchecked(&engine, f, config))
}

fn linear_unchecked(engine: &Engine, f: &LatticeField, config: &SolveConfig) -> SolutionPath {
    let f_hat = engine.spectrum(f);
    let times = config.times();
    let fields: Vec<LatticeField> = times
        .par_iter()
        .map(|&t| {
            let mut spec = f_hat.clone();
            engine.flow(&mut spec, t);
            engine.field(spec)
        })
        .collect();
    SolutionPath::new(times, fields, config.grid).expect("grid and window already checked")
}

/// Per-iteration record of a Picard solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PicardLog {
    /// `‖u_{k+1} - u_k‖_X` for each iteration.
    pub distances: Vec<f64>,
    pub converged: bool,
    /// `‖Φ(u) - u‖_X` for the returned path, evaluated after stopping.
    pub residual: f64,
}

impl PicardLog {
    pub fn iterations(&self) -> usize {
        self.distances.len()
    }

    /// `d_{k+1}/d_k` for consecutive iterations.
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect()
    }
}

/// Fixed-point iteration `u_0 = e^{itΔ}f`, `u_{k+1} = Φ(u_k)` until
/// `‖u_{k+1} - u_k‖_X ≤ tolerance`. Non-convergence is reported in the log.
pub fn picard_solve(problem: &DnlsProblem, config: &SolveConfig) -> Result<(SolutionPath, PicardLog)> {
    config.validate()?;
    resolution_check(problem.initial.radius(), config.horizon, config.grid)?;
    let engine = Engine::new(config.grid, problem.initial.radius());
    let mut u = linear_unchecked(&engine, &problem.initial, config);
    let mut distances = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iterations {
        let next = duhamel_unchecked(&engine, &u, problem, config);
        let d = x_norm(&next.sub(&u)?, problem)?;
        distances.push(d);
        u = next;
        if d <= config.tolerance {
            converged = true;
            break;
        }
    }
    let residual = x_norm(&duhamel_unchecked(&engine, &u, problem, config).sub(&u)?, problem)?;
    Ok((u, PicardLog { distances, converged, residual }))
}

/// Strang splitting: half linear step, exact phase rotation
/// `u ← u·e^{-iμ|u|^{α-1}h}`, half linear step.
pub fn splitstep_solve(problem: &DnlsProblem, config: &SolveConfig) -> Result<SolutionPath> {
    config.validate()?;
    resolution_check(problem.initial.radius(), config.horizon, config.grid)?;
    let engine = Engine::new(config.grid, problem.initial.radius());
    let h = config.step();
    let half: Vec<C64> = engine.omega.iter().map(|w| C64::from_polar(1.0, -0.5 * h * w)).collect();
    let mut state = to_periodic(&problem.initial, engine.m);
    let l2 = |v: &[C64]| pairwise_sum(&v.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()).sqrt();
    let mut fields = vec![problem.initial.clone()];
    let mut mass = vec![l2(&state)];
    let e = problem.alpha - 1.0;
    for _ in 0..config.steps {
        let mut spec = engine.forward(state);
        spec.iter_mut().zip(&half).for_each(|(z, m)| *z *= m);
        state = engine.backward(spec);
        for z in state.iter_mut() {
            let m2 = z.norm_sqr();
            if m2 > 0.0 {
                let amp = if e.fract() == 0.0 && (e as i64) % 2 == 0 { m2.powi(e as i32 / 2) } else { (0.5 * e * m2.ln()).exp() };
                *z *= C64::from_polar(1.0, -problem.mu * amp * h);
            }
        }
        let mut spec = engine.forward(state);
        spec.iter_mut().zip(&half).for_each(|(z, m)| *z *= m);
        state = engine.backward(spec);
        fields.push(from_periodic(&state, engine.m, engine.dim, engine.radius));
        mass.push(l2(&state));
    }
    let mut path = SolutionPath::new(config.times(), fields, config.grid)?;
    path.mass = mass;
    Ok(path)
}

/// Contraction measurements on random pairs in the ball `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport {
    /// `‖e^{itΔ}f‖_{L^p(I; ℓ^p)}`, the quantity the smallness condition bounds.
    pub linear_norm: f64,
    pub eta: f64,
    /// `‖Φ(u) - Φ(v)‖_X / ‖u - v‖_X` per trial (0 when `u = v`).
    pub ratios: Vec<f64>,
}

impl ContractionReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// `‖Φ(u) - Φ(v)‖_X / ‖u - v‖_X` for `trials` random pairs with
/// `‖u‖_{L^p ℓ^p}, ‖v‖_{L^p ℓ^p} ≤ 2η` and `sup_t ‖·‖_{L̂^{q'}} ≤ 2‖f‖_{L̂^{q'}}`.
///
/// Fails with a precondition error unless `‖e^{itΔ}f‖_{L^p(I; ℓ^p)} ≤ η`.
pub fn contraction_report(
    problem: &DnlsProblem,
    config: &SolveConfig,
    eta: f64,
    trials: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if !(eta > 0.0) {
        return domain("η must be positive");
    }
    config.validate()?;
    resolution_check(problem.initial.radius(), config.horizon, config.grid)?;
    let engine = Engine::new(config.grid, problem.initial.radius());
    let lin = linear_unchecked(&engine, &problem.initial, config);
    let interval = (config.horizon.min(0.0), config.horizon.max(0.0));
    let linear_norm = mixed_norm(&lin, problem.p, problem.p, interval)?;
    if linear_norm > eta {
        return precondition(format!("smallness fails: ‖e^{{itΔ}}f‖ = {linear_norm} exceeds η = {eta}"));
    }
    let f_norm = engine.spectral_norm(&engine.spectrum(&problem.initial), problem.q);
    let ratios = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let perturb = |which: u64| -> Result<SolutionPath> {
                let path = random_path(&engine, config, problem.dim(), mix_seed(seed, trial as u64, which));
                let lp = mixed_norm(&path, problem.p, problem.p, interval)?;
                let sup = path.fields.iter().map(|u| engine.spectral_norm(&engine.spectrum(u), problem.q)).fold(0.0, f64::max);
                let mut s = 0.9 * eta / lp;
                if f_norm > 0.0 {
                    s = s.min(0.9 * f_norm / sup);
                }
                Ok(path.scale(C64::new(s, 0.0)))
            };
            let (pu, pv) = (perturb(0)?, perturb(1)?);
            ratio_unchecked(&engine, &add_paths(&lin, &pu)?, &add_paths(&lin, &pv)?, problem, config)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ContractionReport { linear_norm, eta, ratios })
}

/// `‖Φ(u) - Φ(v)‖_X / ‖u - v‖_X`, defined as 0 when `u = v`.
pub fn contraction_ratio(u: &SolutionPath, v: &SolutionPath, problem: &DnlsProblem, config: &SolveConfig) -> Result<f64> {
    check_path(u, problem, config)?;
    check_path(v, problem, config)?;
    resolution_check(problem.initial.radius(), config.horizon, config.grid)?;
    let engine = Engine::new(config.grid, problem.initial.radius());
    ratio_unchecked(&engine, u, v, problem, config)
}

fn ratio_unchecked(engine: &Engine, u: &SolutionPath, v: &SolutionPath, problem: &DnlsProblem, config: &SolveConfig) -> Result<f64> {
    let den = x_norm(&u.sub(v)?, problem)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    let num = x_norm(&duhamel_unchecked(engine, u, problem, config).sub(&duhamel_unchecked(engine, v, problem, config))?, problem)?;
    Ok(num / den)
}

fn add_paths(a: &SolutionPath, b: &SolutionPath) -> Result<SolutionPath> {
    let fields = a.fields.iter().zip(&b.fields).map(|(x, y)| x.add(y)).collect::<Result<_>>()?;
    SolutionPath::new(a.times.clone(), fields, a.grid)
}

/// Free evolution of random data near the origin, modulated by a random
/// slow oscillation in time.
fn random_path(engine: &Engine, config: &SolveConfig, dim: usize, seed: u64) -> SolutionPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = engine.radius.min(4) as i64;
    let h = LatticeField::zeros(dim, engine.radius).expect("window already validated");
    let values: Vec<C64> = (0..h.len())
        .map(|i| {
            let z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            if h.coords(i)[..dim].iter().all(|v| v.abs() <= reach) {
                z
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let h = LatticeField::from_values(dim, engine.radius, values).expect("finite values");
    let freq = 2.0 * PI * rng.random::<f64>() / config.horizon.abs().max(1.0);
    let phase = 2.0 * PI * rng.random::<f64>();
    let lin = linear_unchecked(engine, &h, config);
    let fields = lin.fields.iter().zip(&lin.times).map(|(u, &t)| u.scale(C64::new((freq * t + phase).cos(), 0.0))).collect();
    SolutionPath::new(lin.times.clone(), fields, config.grid).expect("same grid")
}

/// Largest `T` on a dyadic bisection lattice of `[0, horizon]` with
/// `‖e^{itΔ}f‖_{L^p([0,T]; ℓ^p)} ≤ η`; the norm uses a 1024-step trapezoid grid.
pub fn smallness_time(f: &LatticeField, p: f64, eta: f64, grid: TorusGrid, horizon: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return domain("η must be positive");
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return domain("horizon must be positive");
    }
    let config = SolveConfig::new(horizon, 1024, 1.0, 1, grid)?;
    let path = linear_path(f, &config)?;
    let norm = |t: f64| mixed_norm(&path, p, p, (0.0, t));
    if norm(horizon)? <= eta {
        return Ok(horizon);
    }
    let (mut lo, mut hi) = (0.0, horizon);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if norm(mid)? <= eta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Which end of time the scattering state describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Direction::Plus => "+",
            Direction::Minus => "-",
        }
    }
}

/// Truncated scattering state and the approach of `e^{-itΔ}u(t)` to it.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringReport {
    pub direction: Direction,
    /// `u_± = f - iμ ∫_0^T e^{-isΔ} N(u(s)) ds`.
    pub state: LatticeField,
    /// `(t, ‖e^{-itΔ}u(t) - u_±‖_{L̂^{q'}})`, about one entry per unit time.
    pub deviations: Vec<(f64, f64)>,
    /// `(t, ∫_t^T ‖u(s)‖^α_{ℓ^α} ds)` on the same times, the majorant of the
    /// deviation.
    pub tails: Vec<(f64, f64)>,
    pub tail_tolerance: f64,
    /// Whether the tail drops below the tolerance before `T`.
    pub conclusive: bool,
}

impl ScatteringReport {
    /// Tail bound at the reported time nearest `t`.
    pub fn tail_at(&self, t: f64) -> f64 {
        nearest(&self.tails, t)
    }

    pub fn deviation_at(&self, t: f64) -> f64 {
        nearest(&self.deviations, t)
    }
}

fn nearest(xs: &[(f64, f64)], t: f64) -> f64 {
    xs.iter().min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs())).map_or(f64::NAN, |x| x.1)
}

/// Scattering diagnostics for a computed solution; the path's horizon must
/// point in `direction`.
pub fn scattering_states(
    solution: &SolutionPath,
    problem: &DnlsProblem,
    direction: Direction,
    tail_tolerance: f64,
) -> Result<ScatteringReport> {
    let horizon = solution.horizon();
    if horizon * direction.sign() <= 0.0 {
        return precondition(format!("path runs to t = {horizon}, not towards {}∞", direction.tag()));
    }
    if solution.fields[0] != problem.initial {
        return precondition("path does not start from the problem's initial data");
    }
    let engine = Engine::new(solution.grid, problem.initial.radius());
    let steps = solution.len() - 1;
    let g = interaction_integrand(&engine, solution, problem);
    let integral = cumulative_simpson(&g, horizon / steps as f64);
    // the integrand already carries μ
    let c = C64::new(0.0, -1.0);
    let f_hat = engine.spectrum(&problem.initial);
    let state_hat: Vec<C64> = f_hat.iter().zip(&integral[steps]).map(|(f, i)| f + c * i).collect();
    let state = engine.field(state_hat.clone());

    let stride = ((steps as f64 / horizon.abs()).round() as usize).max(1);
    let picks: Vec<usize> = (0..=steps).filter(|n| n % stride == 0 || *n == steps).collect();
    let deviations: Vec<(f64, f64)> = picks
        .par_iter()
        .map(|&n| {
            let mut spec = engine.spectrum(&solution.fields[n]);
            engine.flow(&mut spec, -solution.times[n]);
            let diff: Vec<C64> = spec.iter().zip(&state_hat).map(|(a, b)| a - b).collect();
            (solution.times[n], engine.spectral_norm(&diff, problem.q))
        })
        .collect();

    // Trapezoid tail integrals from the end.
    let dens: Vec<f64> = solution.fields.iter().map(|u| u.norm_lp(problem.alpha).powf(problem.alpha)).collect();
    let mut tail = vec![0.0; steps + 1];
    for n in (0..steps).rev() {
        let h = (solution.times[n + 1] - solution.times[n]).abs();
        tail[n] = tail[n + 1] + 0.5 * h * (dens[n] + dens[n + 1]);
    }
    let tails: Vec<(f64, f64)> = picks.iter().map(|&n| (solution.times[n], tail[n])).collect();
    let conclusive = tail[..steps].iter().any(|&x| x <= tail_tolerance);
    Ok(ScatteringReport { direction, state, deviations, tails, tail_tolerance, conclusive })
}

/// Frequency window for the decay experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayWindow {
    /// The full torus: `f = δ₀`.
    Full,
    /// `f̂ = ψ(|ξ|/cutoff)` per axis with a `C^∞` bump `ψ` supported in
    /// `[-1, 1]`; a cutoff below `π/2` avoids the inflection points of `ω`.
    BandPass { cutoff: f64 },
}

/// Fit of `log ‖e^{itΔ}f‖_{ℓ^∞}` against `log t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Number of log-spaced times in a decay fit.
pub const DECAY_SAMPLES: usize = 33;

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Least-squares slope of `log sup_x |e^{itΔ}f(x)|` over log-spaced
/// `t ∈ [t₀, t₁] ⊆ [10, 200]`, computed on the whole periodic lattice of `grid`.
pub fn decay_exponent(d: usize, t_range: (f64, f64), grid: TorusGrid, window: DecayWindow) -> Result<DecayFit> {
    let (t0, t1) = t_range;
    if !(10.0 <= t0 && t0 < t1 && t1 <= 200.0) {
        return domain(format!("time range [{t0}, {t1}] must lie in [10, 200]"));
    }
    if d != grid.dim() {
        return precondition("dimension differs from the grid's");
    }
    resolution_check(0, t1, grid)?;
    let engine = Engine::new(grid, 0);
    let m = engine.m;
    let axis: Vec<f64> = (0..m)
        .map(|k| {
            let xi = 2.0 * PI * k as f64 / m as f64;
            let xi = if xi > PI { xi - 2.0 * PI } else { xi };
            match window {
                DecayWindow::Full => 1.0,
                DecayWindow::BandPass { cutoff } => bump(xi / cutoff),
            }
        })
        .collect();
    let spec0: Vec<C64> = if d == 1 {
        axis.iter().map(|&a| C64::new(a, 0.0)).collect()
    } else {
        (0..m * m).map(|i| C64::new(axis[i / m] * axis[i % m], 0.0)).collect()
    };
    if let DecayWindow::BandPass { cutoff } = window {
        if !(cutoff > 0.0 && cutoff <= PI) {
            return domain(format!("band-pass cutoff {cutoff} must lie in (0, π]"));
        }
    }
    let times: Vec<f64> = (0..DECAY_SAMPLES)
        .map(|i| t0 * (t1 / t0).powf(i as f64 / (DECAY_SAMPLES - 1) as f64))
        .collect();
    let samples: Vec<(f64, f64)> = times
        .iter()
        .map(|&t| {
            let mut spec = spec0.clone();
            engine.flow(&mut spec, t);
            let u = engine.backward(spec);
            (t, u.iter().map(|z| z.norm()).fold(0.0, f64::max))
        })
        .collect();
    let fit = crate::analysis::fit_growth_exponent(&samples)?;
    Ok(DecayFit { slope: fit.exponent, intercept: fit.intercept, residual: fit.residual, samples })
}
