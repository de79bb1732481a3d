//! Uniform periodic grid, complex wavefunctions, spectral derivatives,
//! quadrature and the canonical observables.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width (in grid cells) of the edge band watched by the leakage monitor.
pub const EDGE_CELLS: usize = 5;
/// Largest amplitude tolerated inside the edge band for a valid state.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Norm deviation above which a state is rejected as non-normalized.
pub const NORM_TOL: f64 = 1e-6;

/// Reduced Planck constant and particle mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl PhysConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// ħ = m = 1.
    pub const fn natural() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }

    /// Nelson diffusion coefficient ħ/2m.
    pub fn diffusion(&self) -> f64 {
        self.hbar / (2.0 * self.mass)
    }
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self::natural()
    }
}

/// Cached FFT plans and wavenumbers for one grid size.
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl Spectral {
    fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let k = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                TAU * m / length
            })
            .collect();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            k,
        }
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse transform including the 1/n factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }

    /// Fourier multiplier for d^order/dx^order. The Nyquist mode is dropped
    /// for odd orders so the first-derivative matrix stays antisymmetric.
    fn multiplier(&self, j: usize, order: u32) -> Complex64 {
        let n = self.k.len();
        let k = self.k[j];
        match order {
            1 if j == n / 2 => Complex64::new(0.0, 0.0),
            1 => Complex64::new(0.0, k),
            _ => Complex64::new(-k * k, 0.0),
        }
    }
}

/// Uniform grid x_j = x_min + j·dx, j = 0..n, with periodic spectral calculus.
#[derive(Clone)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    dx: f64,
    spectral: Arc<Spectral>,
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D")
            .field("x_min", &self.x_min)
            .field("x_max", &self.x_max)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.x_min == other.x_min && self.x_max == other.x_max && self.n == other.n
    }
}

impl Default for Grid1D {
    fn default() -> Self {
        Self::new(-20.0, 20.0, 1024).expect("default grid is valid")
    }
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        let length = x_max - x_min;
        Ok(Self {
            x_min,
            x_max,
            n,
            dx: length / n as f64,
            spectral: Arc::new(Spectral::new(n, length)),
        })
    }

    /// Symmetric grid [-half_width, half_width).
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn wavenumbers(&self) -> &[f64] {
        self.spectral.wavenumbers()
    }

    /// Index of the grid point closest to `x` (clamped to the grid).
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::ShapeMismatch { expected: self.n, got: len });
        }
        Ok(())
    }

    /// Spectral derivative of a complex field.
    pub fn derivative_complex(&self, field: &[Complex64], order: u32) -> Result<Vec<Complex64>> {
        self.check_len(field.len())?;
        if !(order == 1 || order == 2) {
            return Err(Error::InvalidInput(format!("derivative order must be 1 or 2, got {order}")));
        }
        let mut buf = field.to_vec();
        self.spectral.forward(&mut buf);
        for (j, z) in buf.iter_mut().enumerate() {
            *z *= self.spectral.multiplier(j, order);
        }
        self.spectral.inverse(&mut buf);
        Ok(buf)
    }

    /// Spectral derivative of a real field.
    pub fn derivative(&self, field: &[f64], order: u32) -> Result<Vec<f64>> {
        let z: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.derivative_complex(&z, order)?.into_iter().map(|z| z.re).collect())
    }

    /// Periodic trapezoidal rule: Σ f_j · dx.
    pub fn quadrature(&self, field: &[f64]) -> Result<f64> {
        self.check_len(field.len())?;
        Ok(field.iter().sum::<f64>() * self.dx)
    }

    pub fn quadrature_complex(&self, field: &[Complex64]) -> Result<Complex64> {
        self.check_len(field.len())?;
        Ok(field.iter().sum::<Complex64>() * self.dx)
    }
}

/// A complex state ψ(x) sampled on a grid.
#[derive(Clone, Debug)]
pub struct WaveFunction {
    grid: Grid1D,
    psi: Vec<Complex64>,
    constants: PhysConstants,
}

impl WaveFunction {
    /// Wraps samples as they are; use [`WaveFunction::normalized`] or
    /// [`WaveFunction::validate`] to enforce the state invariants.
    pub fn new(grid: Grid1D, psi: Vec<Complex64>, constants: PhysConstants) -> Result<Self> {
        grid.check_len(psi.len())?;
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("wavefunction contains non-finite samples".into()));
        }
        Ok(Self { grid, psi, constants })
    }

    pub fn from_fn(
        grid: Grid1D,
        constants: PhysConstants,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let psi = grid.points().into_iter().map(f).collect();
        Self::new(grid, psi, constants)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn into_psi(self) -> Vec<Complex64> {
        self.psi
    }

    pub fn constants(&self) -> PhysConstants {
        self.constants
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("cannot normalize a zero state".into()));
        }
        self.psi.iter_mut().for_each(|z| *z /= norm);
        Ok(self)
    }

    /// Largest |ψ| within [`EDGE_CELLS`] cells of either edge.
    pub fn boundary_amplitude(&self) -> f64 {
        let n = self.psi.len();
        self.psi[..EDGE_CELLS]
            .iter()
            .chain(&self.psi[n - EDGE_CELLS..])
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn check_boundary(&self, threshold: f64) -> Result<()> {
        let amplitude = self.boundary_amplitude();
        if amplitude > threshold {
            return Err(Error::BoundaryLeakage { amplitude, threshold });
        }
        Ok(())
    }

    /// Norm within [`NORM_TOL`] and packet clear of the edges.
    pub fn validate(&self) -> Result<()> {
        let deviation = (self.norm_sqr() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NotNormalized { deviation });
        }
        self.check_boundary(BOUNDARY_TOL)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("states live on different grids".into()));
        }
        Ok(self
            .psi
            .iter()
            .zip(&other.psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx())
    }

    /// |⟨self|other⟩|.
    pub fn overlap(&self, other: &WaveFunction) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    pub fn derivative(&self, order: u32) -> Result<Vec<Complex64>> {
        self.grid.derivative_complex(&self.psi, order)
    }

    /// Evaluates the band-limited (trigonometric) interpolant at arbitrary points.
    pub fn interpolate(&self, xs: &[f64]) -> Vec<Complex64> {
        let n = self.psi.len();
        let mut coeffs = self.psi.clone();
        self.grid.spectral().forward(&mut coeffs);
        let scale = 1.0 / n as f64;
        let base_k = TAU / self.grid.length();
        let half = n / 2;
        xs.iter()
            .map(|&x| {
                let s = x - self.grid.x_min();
                let w = Complex64::from_polar(1.0, base_k * s);
                let mut acc = coeffs[0];
                let mut wp = Complex64::new(1.0, 0.0);
                for j in 1..half {
                    wp *= w;
                    acc += coeffs[j] * wp + coeffs[n - j] * wp.conj();
                }
                acc += coeffs[half] * (base_k * half as f64 * s).cos();
                acc * scale
            })
            .collect()
    }

    /// Multiplies by a global phase e^{iθ}.
    pub fn with_global_phase(mut self, theta: f64) -> Self {
        let w = Complex64::from_polar(1.0, theta);
        self.psi.iter_mut().for_each(|z| *z *= w);
        self
    }

    /// L² distance ‖self − other‖.
    pub fn distance(&self, other: &WaveFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("states live on different grids".into()));
        }
        let s: f64 = self.psi.iter().zip(&other.psi).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.grid.dx()).sqrt())
    }

    /// L² distance after removing the best global phase between the states.
    pub fn phase_aligned_distance(&self, other: &WaveFunction) -> Result<f64> {
        let ip = self.inner(other)?;
        if ip.norm() == 0.0 {
            return self.distance(other);
        }
        let aligned = other.clone().with_global_phase(-ip.arg());
        self.distance(&aligned)
    }
}

/// Canonical expectation values of a state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub q_mean: f64,
    pub p_mean: f64,
    pub dq: f64,
    pub dp: f64,
    /// ⟨{Q̂,P̂}⟩/2 with Q̂ = q̂ − ⟨q̂⟩, P̂ = p̂ − ⟨p̂⟩.
    pub anticom: f64,
    /// ⟨p̂²⟩/2m.
    pub kinetic: f64,
}

impl Observables {
    pub fn uncertainty_product(&self) -> f64 {
        self.dq * self.dp
    }
}

/// Computes ⟨q̂⟩, ⟨p̂⟩, Δq̂, Δp̂ and the anticommutator with spectral p̂.
pub fn observables(wf: &WaveFunction) -> Result<Observables> {
    observables_within(wf, BOUNDARY_TOL)
}

/// [`observables`] with an explicit edge-amplitude limit, for propagated
/// states that are allowed to carry radiation up to the propagator's abort
/// threshold.
pub fn observables_within(wf: &WaveFunction, leakage: f64) -> Result<Observables> {
    let deviation = (wf.norm_sqr() - 1.0).abs();
    if deviation > NORM_TOL {
        return Err(Error::NotNormalized { deviation });
    }
    wf.check_boundary(leakage)?;
    let grid = wf.grid();
    let c = wf.constants();
    let dx = grid.dx();
    let psi = wf.psi();
    let rho = wf.density();
    let xs = grid.points();

    let q_mean = xs.iter().zip(&rho).map(|(x, r)| x * r).sum::<f64>() * dx;
    let dq2 = xs.iter().zip(&rho).map(|(x, r)| (x - q_mean).powi(2) * r).sum::<f64>() * dx;

    let dpsi = wf.derivative(1)?;
    let p_psi: Vec<Complex64> = dpsi.iter().map(|d| Complex64::new(0.0, -c.hbar) * d).collect();
    let p_mean = psi.iter().zip(&p_psi).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * dx;
    let p2 = p_psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;

    let mut dp2 = 0.0;
    let mut anticom = 0.0;
    for j in 0..psi.len() {
        let centered = p_psi[j] - psi[j] * p_mean;
        dp2 += centered.norm_sqr();
        anticom += (psi[j].conj() * (xs[j] - q_mean) * centered).re;
    }

    Ok(Observables {
        q_mean,
        p_mean,
        dq: dq2.sqrt(),
        dp: (dp2 * dx).sqrt(),
        anticom: anticom * dx,
        kinetic: p2 / (2.0 * c.mass),
    })
}

/// Mean and spread of momentum from the momentum-space density |φ(k)|².
pub fn momentum_space_moments(wf: &WaveFunction) -> (f64, f64) {
    let hbar = wf.constants().hbar;
    let mut phi = wf.psi().to_vec();
    wf.grid().spectral().forward(&mut phi);
    let k = wf.grid().wavenumbers();
    let weights: Vec<f64> = phi.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    let mean = k.iter().zip(&weights).map(|(k, w)| hbar * k * w).sum::<f64>() / total;
    let var = k
        .iter()
        .zip(&weights)
        .map(|(k, w)| (hbar * k - mean).powi(2) * w)
        .sum::<f64>()
        / total;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian(grid: &Grid1D, center: f64, dq: f64) -> WaveFunction {
        let norm = (2.0 * PI * dq * dq).powf(-0.25);
        WaveFunction::from_fn(grid.clone(), PhysConstants::natural(), |x| {
            Complex64::new(norm * (-(x - center).powi(2) / (4.0 * dq * dq)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn rejects_bad_grids_and_constants() {
        assert!(Grid1D::new(-1.0, 1.0, 100).is_err());
        assert!(Grid1D::new(-1.0, 1.0, 8).is_err());
        assert!(Grid1D::new(1.0, -1.0, 64).is_err());
        assert!(PhysConstants::new(1.0, -1.0).is_err());
        assert!(PhysConstants::new(0.0, 1.0).is_err());
    }

    #[test]
    fn sine_derivative_is_spectrally_exact() {
        let grid = Grid1D::new(0.0, 2.0 * PI, 64).unwrap();
        let k = 3.0;
        let f: Vec<f64> = grid.points().iter().map(|x| (k * x).sin()).collect();
        let d = grid.derivative(&f, 1).unwrap();
        for (x, dv) in grid.points().iter().zip(&d) {
            assert!((dv - k * (k * x).cos()).abs() <= 1e-10 * k);
        }
        let d2 = grid.derivative(&f, 2).unwrap();
        for (x, dv) in grid.points().iter().zip(&d2) {
            assert!((dv + k * k * (k * x).sin()).abs() <= 1e-10 * k * k);
        }
    }

    #[test]
    fn constant_field_has_zero_derivative() {
        let grid = Grid1D::default();
        let d = grid.derivative(&vec![2.5; grid.len()], 1).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gaussian_derivative() {
        let grid = Grid1D::default();
        let f: Vec<f64> = grid.points().iter().map(|x| (-x * x / 2.0).exp()).collect();
        let d = grid.derivative(&f, 1).unwrap();
        for (x, dv) in grid.points().iter().zip(&d) {
            assert!((dv + x * (-x * x / 2.0).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_order_is_checked() {
        let grid = Grid1D::default();
        assert!(matches!(grid.derivative(&vec![0.0; 1024], 3), Err(Error::InvalidInput(_))));
        assert!(matches!(grid.derivative(&[0.0; 3], 1), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn quadrature_examples() {
        let grid = Grid1D::new(-12.0, 12.0, 1024).unwrap();
        let normal: Vec<f64> = grid
            .points()
            .iter()
            .map(|x| (-x * x / 2.0).exp() / (2.0 * PI).sqrt())
            .collect();
        assert!((grid.quadrature(&normal).unwrap() - 1.0).abs() < 1e-12);

        // odd integrand on the symmetric periodic grid: the unpaired x_min
        // sample is negligible for a decaying function
        let odd: Vec<f64> = grid.points().iter().map(|x| x * (-x * x).exp()).collect();
        assert!(grid.quadrature(&odd).unwrap().abs() < 1e-12);

        let wf = gaussian(&Grid1D::default(), 0.3, 0.8);
        assert!((grid_norm(&wf) - 1.0).abs() < 1e-9);
    }

    fn grid_norm(wf: &WaveFunction) -> f64 {
        wf.grid().quadrature(&wf.density()).unwrap()
    }

    #[test]
    fn ground_state_observables() {
        let wf = gaussian(&Grid1D::default(), 0.0, 1.0 / 2f64.sqrt());
        let o = observables(&wf).unwrap();
        assert!((o.dq - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((o.dp - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((o.uncertainty_product() - 0.5).abs() < 1e-12);
        assert!(o.anticom.abs() < 1e-12);
    }

    #[test]
    fn shifted_and_boosted_observables() {
        let grid = Grid1D::default();
        let wf = gaussian(&grid, 1.3, 1.0 / 2f64.sqrt());
        let o = observables(&wf).unwrap();
        assert!((o.q_mean - 1.3).abs() < 1e-12);
        assert!(o.p_mean.abs() < 1e-12);

        let boosted = WaveFunction::new(
            grid.clone(),
            wf.psi()
                .iter()
                .zip(grid.points())
                .map(|(z, x)| z * Complex64::from_polar(1.0, 2.0 * x))
                .collect(),
            PhysConstants::natural(),
        )
        .unwrap();
        let ob = observables(&boosted).unwrap();
        assert!((ob.p_mean - o.p_mean - 2.0).abs() < 1e-10);
        assert!((ob.dp - o.dp).abs() < 1e-10);
    }

    #[test]
    fn rejects_unnormalized_and_leaking_states() {
        let grid = Grid1D::default();
        let wf = gaussian(&grid, 0.0, 1.0);
        let doubled = WaveFunction::new(
            grid.clone(),
            wf.psi().iter().map(|z| z * 2.0).collect(),
            PhysConstants::natural(),
        )
        .unwrap();
        assert!(matches!(observables(&doubled), Err(Error::NotNormalized { .. })));

        let wide = gaussian(&grid, 0.0, 6.0).normalized().unwrap();
        assert!(matches!(observables(&wide), Err(Error::BoundaryLeakage { .. })));
    }

    #[test]
    fn parseval_momentum_spread() {
        let grid = Grid1D::default();
        let wf = WaveFunction::from_fn(grid, PhysConstants::natural(), |x| {
            let amp = (-(x - 0.4).powi(2) / 1.2).exp() * (1.0 + 0.3 * (x / 2.0).tanh());
            amp * Complex64::from_polar(1.0, 0.7 * x + 0.2 * x * x)
        })
        .unwrap()
        .normalized()
        .unwrap();
        let o = observables(&wf).unwrap();
        let (p_mean, dp) = momentum_space_moments(&wf);
        assert!((p_mean - o.p_mean).abs() < 1e-8);
        assert!((dp - o.dp).abs() < 1e-8);
    }

    #[test]
    fn trigonometric_interpolation_reproduces_smooth_state() {
        let grid = Grid1D::default();
        let wf = gaussian(&grid, 0.2, 0.9);
        let xs = [-1.234, 0.0, 0.3333, 2.71];
        let vals = wf.interpolate(&xs);
        let norm = (2.0 * PI * 0.81f64).powf(-0.25);
        for (x, v) in xs.iter().zip(vals) {
            let exact = norm * (-(x - 0.2).powi(2) / (4.0 * 0.81)).exp();
            assert!((v.re - exact).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn heisenberg_bound_and_translation_covariance(
            center in -2.0..2.0f64,
            width in 0.4..1.2f64,
            chirp in -0.5..0.5f64,
            skew in -0.6..0.6f64,
            shift in -1.5..1.5f64,
        ) {
            let grid = Grid1D::default();
            let make = |x0: f64| {
                WaveFunction::from_fn(grid.clone(), PhysConstants::natural(), |x| {
                    let y = x - x0;
                    let amp = (-(y * y) / (4.0 * width * width)).exp() * (1.0 + skew * (y / width).tanh());
                    amp * Complex64::from_polar(1.0, chirp * y * y)
                }).unwrap().normalized().unwrap()
            };
            let a = observables(&make(center)).unwrap();
            prop_assert!(a.dq * a.dp >= 0.5 - 1e-9);
            let b = observables(&make(center + shift)).unwrap();
            prop_assert!((b.q_mean - a.q_mean - shift).abs() < 1e-10);
            prop_assert!((b.dq - a.dq).abs() < 1e-10);
            prop_assert!((b.dp - a.dp).abs() < 1e-10);
        }
    }
}
