//! Discrete Fourier analysis on ℤ^d for d ∈ {1, 2}.
//!
//! Fields live on a finite window `[-N, N]^d` stored lexicographically (first
//! coordinate slowest). Frequencies live on a uniform torus grid
//! `ξ_j = -π + 2πj/M`. The inverse transform uses the normalized Haar measure,
//! realized as the mean over grid nodes, so `ℓ²` and `L̂²` norms coincide.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, precondition, Result};

pub type C64 = Complex64;

/// Complex field on the window `[-N, N]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField {
    dim: usize,
    radius: usize,
    values: Vec<C64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        domain(format!("dimension must be 1 or 2, got {dim}"))
    }
}

impl LatticeField {
    pub fn zeros(dim: usize, radius: usize) -> Result<Self> {
        check_dim(dim)?;
        let side = 2 * radius + 1;
        Ok(Self { dim, radius, values: vec![C64::new(0.0, 0.0); side.pow(dim as u32)] })
    }

    pub fn from_values(dim: usize, radius: usize, values: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        let expected = (2 * radius + 1).pow(dim as u32);
        if values.len() != expected {
            return precondition(format!(
                "field on radius {radius} in d={dim} needs {expected} values, got {}",
                values.len()
            ));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("field values must be finite");
        }
        Ok(Self { dim, radius, values })
    }

    /// `f(x)` evaluated at every window site.
    pub fn from_fn(dim: usize, radius: usize, f: impl Fn(&[i64]) -> C64) -> Result<Self> {
        let mut field = Self::zeros(dim, radius)?;
        for i in 0..field.values.len() {
            let c = field.coords(i);
            field.values[i] = f(&c[..dim]);
        }
        Self::from_values(dim, radius, field.values)
    }

    /// The unit spike `δ_k`.
    pub fn delta(dim: usize, radius: usize, site: &[i64]) -> Result<Self> {
        let mut field = Self::zeros(dim, radius)?;
        match field.index_of(site) {
            Some(i) => {
                field.values[i] = C64::new(1.0, 0.0);
                Ok(field)
            }
            None => domain(format!("site {site:?} outside window of radius {radius}")),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Site coordinates of a storage index; the second entry is 0 when d = 1.
    pub fn coords(&self, index: usize) -> [i64; 2] {
        let n = self.radius as i64;
        let side = self.side();
        if self.dim == 1 {
            [index as i64 - n, 0]
        } else {
            [(index / side) as i64 - n, (index % side) as i64 - n]
        }
    }

    pub fn index_of(&self, site: &[i64]) -> Option<usize> {
        if site.len() != self.dim {
            return None;
        }
        let n = self.radius as i64;
        if site.iter().any(|&x| x < -n || x > n) {
            return None;
        }
        let side = self.side();
        Some(match self.dim {
            1 => (site[0] + n) as usize,
            _ => (site[0] + n) as usize * side + (site[1] + n) as usize,
        })
    }

    /// Value at a site, 0 outside the window.
    pub fn get(&self, site: &[i64]) -> C64 {
        self.index_of(site).map_or(C64::new(0.0, 0.0), |i| self.values[i])
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `ℓ^p` norm; `p = ∞` gives the sup norm.
    pub fn norm_lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        if p == 2.0 {
            return self.norm_l2();
        }
        let scale = self.sup_norm();
        if scale == 0.0 {
            return 0.0;
        }
        let s: f64 = self.values.iter().map(|z| (z.norm() / scale).powf(p)).sum();
        scale * s.powf(1.0 / p)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.radius != other.radius {
            return precondition("fields live on different windows");
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { values, ..*self })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { values, ..*self })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { values: self.values.iter().map(|z| z * c).collect(), ..*self }
    }

    /// Copy onto another window radius, dropping or zero-padding sites.
    pub fn resize(&self, radius: usize) -> Self {
        let mut out = Self::zeros(self.dim, radius).expect("dimension already validated");
        for i in 0..out.values.len() {
            let c = out.coords(i);
            out.values[i] = self.get(&c[..self.dim]);
        }
        out
    }

    /// Largest `|x|_∞` over sites carrying a nonzero value.
    pub fn support_radius(&self) -> usize {
        (0..self.values.len())
            .filter(|&i| self.values[i] != C64::new(0.0, 0.0))
            .map(|i| {
                let c = self.coords(i);
                c[0].unsigned_abs().max(c[1].unsigned_abs()) as usize
            })
            .max()
            .unwrap_or(0)
    }
}

/// Uniform frequency grid on `[-π, π)^d` with `M` nodes per dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    dim: usize,
    modes: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, modes: usize) -> Result<Self> {
        check_dim(dim)?;
        if modes < 2 || modes % 2 != 0 {
            return domain(format!("modes per dimension must be a positive even integer, got {modes}"));
        }
        Ok(Self { dim, modes })
    }

    /// Smallest power-of-two grid that transforms fields of radius `radius`.
    pub fn for_window(dim: usize, radius: usize) -> Result<Self> {
        Self::new(dim, (2 * radius + 2).next_power_of_two())
    }

    /// Smallest power-of-two grid satisfying the propagation rule for `(radius, t)`.
    pub fn for_propagation(dim: usize, radius: usize, t: f64) -> Result<Self> {
        Self::new(dim, propagation_modes(radius, t).next_power_of_two())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Total node count `M^d`.
    pub fn len(&self) -> usize {
        self.modes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / self.modes as f64
    }

    /// Coordinates of the node with flat index `index`.
    pub fn point(&self, index: usize) -> [f64; 2] {
        if self.dim == 1 {
            [self.node(index), 0.0]
        } else {
            [self.node(index / self.modes), self.node(index % self.modes)]
        }
    }

    /// `ω` at every node, in storage order.
    pub fn omega_table(&self) -> Vec<f64> {
        let one: Vec<f64> = (0..self.modes).map(|j| omega1(self.node(j))).collect();
        if self.dim == 1 {
            one
        } else {
            let mut out = Vec::with_capacity(self.len());
            for a in &one {
                for b in &one {
                    out.push(a + b);
                }
            }
            out
        }
    }
}

/// Minimum modes per dimension for propagating a radius-`radius` field to time `t`.
pub fn propagation_modes(radius: usize, t: f64) -> usize {
    2 * (radius + (2.0 * t.abs()).ceil() as usize) + 8
}

/// Samples of a function on a [`TorusGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct TorusFunction {
    grid: TorusGrid,
    values: Vec<C64>,
}

impl TorusFunction {
    pub fn new(grid: TorusGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return precondition(format!("grid has {} nodes, got {} values", grid.len(), values.len()));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("torus function values must be finite");
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                f(&p[..grid.dim])
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// `L^s` norm under the normalized Haar measure (mean over nodes).
    pub fn norm_lp(&self, s: f64) -> f64 {
        if s.is_infinite() {
            return self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        let scale = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mean = self.values.iter().map(|z| (z.norm() / scale).powf(s)).sum::<f64>()
            / self.values.len() as f64;
        scale * mean.powf(1.0 / s)
    }
}

fn omega1(xi: f64) -> f64 {
    let s = (0.5 * xi).sin();
    4.0 * s * s
}

/// Dispersion symbol `ω(ξ) = Σ 4 sin²(ξ_i / 2)`.
pub fn symbol_omega(xi: &[f64]) -> Result<f64> {
    check_dim(xi.len())?;
    if xi.iter().any(|x| !(-PI..=PI).contains(x)) {
        return domain(format!("frequency {xi:?} outside [-π, π]"));
    }
    Ok(xi.iter().map(|&x| omega1(x)).sum())
}

fn fft_plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let mut planner = PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    }
}

fn transpose(data: &[C64], m: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); data.len()];
    for r in 0..m {
        for c in 0..m {
            out[c * m + r] = data[r * m + c];
        }
    }
    out
}

/// Unnormalized in-place FFT over all axes of an `M^d` periodic array.
pub(crate) fn fft_periodic(data: &mut Vec<C64>, m: usize, dim: usize, inverse: bool) {
    let plan = fft_plan(m, inverse);
    plan.process(data);
    if dim == 2 {
        let mut t = transpose(data, m);
        plan.process(&mut t);
        *data = transpose(&t, m);
    }
}

fn wrap(x: i64, m: usize) -> usize {
    x.rem_euclid(m as i64) as usize
}

fn parity_sign(c: [i64; 2]) -> f64 {
    if (c[0] + c[1]).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Window values laid out on the periodic lattice `ℤ_M^d` (row-major, `x ↦ x mod M`).
pub(crate) fn to_periodic(u: &LatticeField, m: usize) -> Vec<C64> {
    let mut data = vec![C64::new(0.0, 0.0); m.pow(u.dim as u32)];
    for (i, z) in u.values.iter().enumerate() {
        let c = u.coords(i);
        let idx = if u.dim == 1 { wrap(c[0], m) } else { wrap(c[0], m) * m + wrap(c[1], m) };
        data[idx] += z;
    }
    data
}

/// Inverse of [`to_periodic`] on a window of radius `radius ≤ M/2 - 1`.
pub(crate) fn from_periodic(data: &[C64], m: usize, dim: usize, radius: usize) -> LatticeField {
    let mut out = LatticeField::zeros(dim, radius).expect("dimension already validated");
    for i in 0..out.values.len() {
        let c = out.coords(i);
        let idx = if dim == 1 { wrap(c[0], m) } else { wrap(c[0], m) * m + wrap(c[1], m) };
        out.values[i] = data[idx];
    }
    out
}

/// Node samples of `Σ_x u(x) e^{-ix·ξ}` without window checks.
pub(crate) fn spectrum(u: &LatticeField, grid: TorusGrid) -> Vec<C64> {
    let m = grid.modes;
    let mut data = vec![C64::new(0.0, 0.0); grid.len()];
    for (i, z) in u.values.iter().enumerate() {
        let c = u.coords(i);
        let idx = if u.dim == 1 { wrap(c[0], m) } else { wrap(c[0], m) * m + wrap(c[1], m) };
        data[idx] += z * parity_sign(c);
    }
    fft_periodic(&mut data, m, grid.dim, false);
    data
}

/// Mean-over-nodes inverse transform restricted to radius `radius`, without checks.
pub(crate) fn from_spectrum(mut data: Vec<C64>, grid: TorusGrid, radius: usize) -> LatticeField {
    let m = grid.modes;
    fft_periodic(&mut data, m, grid.dim, true);
    let norm = 1.0 / grid.len() as f64;
    let mut out = LatticeField::zeros(grid.dim, radius).expect("dimension already validated");
    for i in 0..out.values.len() {
        let c = out.coords(i);
        let idx = if grid.dim == 1 { wrap(c[0], m) } else { wrap(c[0], m) * m + wrap(c[1], m) };
        out.values[i] = data[idx] * (norm * parity_sign(c));
    }
    out
}

fn check_window(dim: usize, radius: usize, grid: TorusGrid) -> Result<()> {
    if dim != grid.dim {
        return precondition(format!("field dimension {dim} differs from grid dimension {}", grid.dim));
    }
    if grid.modes < 2 * radius + 2 {
        return precondition(format!(
            "grid with M = {} cannot resolve window radius {radius}: need M ≥ {}",
            grid.modes,
            2 * radius + 2
        ));
    }
    Ok(())
}

/// `𝓕u(ξ_j) = Σ_x u(x) e^{-ix·ξ_j}` at every grid node.
pub fn forward_dft(u: &LatticeField, grid: TorusGrid) -> Result<TorusFunction> {
    check_window(u.dim, u.radius, grid)?;
    Ok(TorusFunction { grid, values: spectrum(u, grid) })
}

/// `x ↦ M^{-d} Σ_j v(ξ_j) e^{ix·ξ_j}` on the window of radius `radius`.
pub fn inverse_dft(v: &TorusFunction, radius: usize) -> Result<LatticeField> {
    check_window(v.grid.dim, radius, v.grid)?;
    Ok(from_spectrum(v.values.clone(), v.grid, radius))
}

pub(crate) fn check_propagation(radius: usize, t: f64, grid: TorusGrid) -> Result<()> {
    let need = propagation_modes(radius, t);
    if grid.modes < need {
        return precondition(format!(
            "grid with M = {} too coarse to propagate radius {radius} to t = {t}: need M ≥ {need}",
            grid.modes
        ));
    }
    Ok(())
}

/// Multiply a spectrum by `e^{-itω}` in place.
pub(crate) fn apply_flow(spec: &mut [C64], omega: &[f64], t: f64) {
    for (z, w) in spec.iter_mut().zip(omega) {
        *z *= C64::from_polar(1.0, -t * w);
    }
}

/// Free evolution `e^{itΔ} f`, returned on the window of `f`.
pub fn propagate(f: &LatticeField, t: f64, grid: TorusGrid) -> Result<LatticeField> {
    if !t.is_finite() {
        return domain("time must be finite");
    }
    check_window(f.dim, f.radius, grid)?;
    check_propagation(f.radius, t, grid)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let mut spec = spectrum(f, grid);
    apply_flow(&mut spec, &grid.omega_table(), t);
    Ok(from_spectrum(spec, grid, f.radius))
}

/// Nearest-neighbour Laplacian with zero values outside the window.
pub fn discrete_laplacian(u: &LatticeField) -> LatticeField {
    let mut out = u.clone();
    for i in 0..u.values.len() {
        let c = u.coords(i);
        let x = &c[..u.dim];
        let mut acc = -2.0 * u.dim as f64 * u.values[i];
        for axis in 0..u.dim {
            let mut fwd = [x[0], if u.dim == 2 { x[1] } else { 0 }];
            let mut bwd = fwd;
            fwd[axis] += 1;
            bwd[axis] -= 1;
            acc += u.get(&fwd[..u.dim]) + u.get(&bwd[..u.dim]);
        }
        out.values[i] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn omega_examples() {
        assert_eq!(symbol_omega(&[0.0]).unwrap(), 0.0);
        assert!((symbol_omega(&[PI]).unwrap() - 4.0).abs() < 1e-15);
        assert!((symbol_omega(&[PI, PI]).unwrap() - 8.0).abs() < 1e-15);
        assert!(symbol_omega(&[3.5]).is_err());
        assert!(symbol_omega(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn delta_transforms() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let d0 = LatticeField::delta(1, 3, &[0]).unwrap();
        for z in forward_dft(&d0, grid).unwrap().values() {
            assert!((z - c(1.0, 0.0)).norm() < 1e-14);
        }
        let d1 = LatticeField::delta(1, 3, &[1]).unwrap();
        let v = forward_dft(&d1, grid).unwrap();
        for (j, z) in v.values().iter().enumerate() {
            let xi = grid.node(j);
            assert!((z - C64::from_polar(1.0, -xi)).norm() < 1e-14);
        }
        let back = inverse_dft(&v, 3).unwrap();
        assert!((back.sub(&d1).unwrap()).sup_norm() < 1e-14);
    }

    #[test]
    fn grid_too_coarse() {
        let u = LatticeField::zeros(1, 8).unwrap();
        assert!(forward_dft(&u, TorusGrid::new(1, 16).unwrap()).is_err());
        assert!(forward_dft(&u, TorusGrid::new(1, 18).unwrap()).is_ok());
        assert!(propagate(&u, 1.0, TorusGrid::new(1, 26).unwrap()).is_err());
        assert!(propagate(&u, 1.0, TorusGrid::new(1, 28).unwrap()).is_ok());
        assert!(TorusGrid::new(1, 7).is_err());
    }

    #[test]
    fn laplacian_stencil() {
        let d0 = LatticeField::delta(1, 3, &[0]).unwrap();
        let l = discrete_laplacian(&d0);
        let expect = [0.0, 0.0, 1.0, -2.0, 1.0, 0.0, 0.0];
        for (z, e) in l.values().iter().zip(expect) {
            assert_eq!(*z, c(e, 0.0));
        }
        let k = LatticeField::from_fn(2, 3, |_| c(2.0, -1.0)).unwrap();
        let l = discrete_laplacian(&k);
        for x in -2..=2 {
            for y in -2..=2 {
                assert_eq!(l.get(&[x, y]), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn propagate_zero_time_is_identity() {
        let f = LatticeField::from_fn(2, 2, |x| c(x[0] as f64, x[1] as f64)).unwrap();
        let grid = TorusGrid::for_propagation(2, 2, 0.0).unwrap();
        assert_eq!(propagate(&f, 0.0, grid).unwrap(), f);
    }

    #[test]
    fn layout_is_lexicographic() {
        let f = LatticeField::zeros(2, 1).unwrap();
        assert_eq!(f.coords(0), [-1, -1]);
        assert_eq!(f.coords(1), [-1, 0]);
        assert_eq!(f.coords(3), [0, -1]);
        assert_eq!(f.index_of(&[1, 1]), Some(8));
    }
}
