//! Madelung decomposition ψ = √ρ e^{iS/ħ} into density, phase, osmotic and
//! current velocities, and residuals of the continuity and
//! Hamilton-Jacobi-Madelung equations.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{observables_within, Grid1D, PhysConstants, WaveFunction, BOUNDARY_TOL};
use crate::potential::PotentialModel;

/// Default density floor below which hydrodynamic fields are not trusted.
pub const DEFAULT_RHO_FLOOR: f64 = 1e-14;

/// Hydrodynamic fields of a state on its grid.
#[derive(Clone, Debug)]
pub struct HydroFields {
    grid: Grid1D,
    constants: PhysConstants,
    pub rho: Vec<f64>,
    /// Unwrapped phase action ħ·arg ψ.
    pub phase: Vec<f64>,
    /// Osmotic velocity (ħ/2m) ∂ₓ ln ρ.
    pub osmotic: Vec<f64>,
    /// Current velocity ∂ₓS/m.
    pub current: Vec<f64>,
    /// ∂ₓ of the osmotic velocity.
    pub osmotic_gradient: Vec<f64>,
    /// Probability flux ρv, computed from ψ directly.
    pub flux: Vec<f64>,
    /// Points where ρ exceeds the floor; fields elsewhere are extrapolated.
    pub valid: Vec<bool>,
}

/// Maximum and L² size of a residual field over the valid region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualNorms {
    pub max_abs: f64,
    pub l2: f64,
}

impl HydroFields {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn constants(&self) -> PhysConstants {
        self.constants
    }

    /// ⟨f⟩ = ∫ f ρ dx.
    fn mean(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.rho.len()).map(|j| f(j) * self.rho[j]).sum::<f64>() * self.grid.dx()
    }

    pub fn mean_osmotic(&self) -> f64 {
        self.mean(|j| self.osmotic[j])
    }

    pub fn mean_square_osmotic(&self) -> f64 {
        self.mean(|j| self.osmotic[j].powi(2))
    }

    /// ρ-weighted standard deviation of u.
    pub fn osmotic_spread(&self) -> f64 {
        (self.mean_square_osmotic() - self.mean_osmotic().powi(2)).max(0.0).sqrt()
    }

    /// ρ-weighted standard deviation of v.
    pub fn current_spread(&self) -> f64 {
        let mean = self.mean(|j| self.current[j]);
        (self.mean(|j| self.current[j].powi(2)) - mean * mean).max(0.0).sqrt()
    }

    /// Shifts the phase so that S equals `value` at the grid point nearest `x`.
    pub fn pin_phase(&mut self, x: f64, value: f64) {
        let offset = value - self.phase[self.grid.nearest_index(x)];
        self.phase.iter_mut().for_each(|s| *s += offset);
    }

    /// Norms of `field` restricted to the valid region.
    pub fn residual_norms(&self, field: &[f64]) -> ResidualNorms {
        let mut max_abs: f64 = 0.0;
        let mut sum = 0.0;
        for (r, &ok) in field.iter().zip(&self.valid) {
            if ok {
                max_abs = max_abs.max(r.abs());
                sum += r * r;
            }
        }
        ResidualNorms { max_abs, l2: (sum * self.grid.dx()).sqrt() }
    }
}

/// Splits a normalized state into (ρ, S, u, v). Velocities come from the
/// logarithmic derivative ψ′/ψ; the phase is unwrapped along the valid
/// region and pinned to zero at the grid point nearest ⟨q⟩.
pub fn decompose(wf: &WaveFunction, rho_floor: f64) -> Result<HydroFields> {
    if !(rho_floor > 0.0) {
        return Err(Error::InvalidInput(format!("density floor must be positive, got {rho_floor}")));
    }
    let deviation = (wf.norm_sqr() - 1.0).abs();
    if deviation > crate::grid::NORM_TOL {
        return Err(Error::NotNormalized { deviation });
    }
    let grid = wf.grid().clone();
    let c = wf.constants();
    let ratio = c.hbar / c.mass;
    let psi = wf.psi();
    let d1 = wf.derivative(1)?;
    let d2 = wf.derivative(2)?;
    let n = psi.len();
    let dx = grid.dx();

    let rho = wf.density();
    let valid: Vec<bool> = rho.iter().map(|&r| r > rho_floor).collect();
    let mut osmotic = vec![f64::NAN; n];
    let mut current = vec![f64::NAN; n];
    let mut osmotic_gradient = vec![f64::NAN; n];
    for j in (0..n).filter(|&j| valid[j]) {
        let l1 = d1[j] / psi[j];
        let l2 = d2[j] / psi[j];
        osmotic[j] = ratio * l1.re;
        current[j] = ratio * l1.im;
        osmotic_gradient[j] = ratio * (l2 - l1 * l1).re;
    }
    if !valid.iter().any(|&v| v) {
        return Err(Error::InvalidInput("no grid point exceeds the density floor".into()));
    }
    for field in [&mut osmotic, &mut current, &mut osmotic_gradient] {
        extrapolate_constant(field, &valid);
    }
    let flux: Vec<f64> = psi.iter().zip(&d1).map(|(p, d)| ratio * (p.conj() * d).im).collect();

    // unwrap along the valid region; a quarter turn per cell, or an increment
    // that disagrees with the integrated phase gradient, means the grid does
    // not resolve the phase
    let mut phase = vec![0.0; n];
    let mut last: Option<usize> = None;
    for j in 0..n {
        if !valid[j] {
            if let Some(i) = last {
                phase[j] = phase[i];
            }
            continue;
        }
        match last {
            None => phase[j] = c.hbar * psi[j].arg(),
            Some(i) => {
                let step = (psi[j] * psi[i].conj()).arg();
                let predicted = 0.5 * c.mass * (current[i] + current[j]) * (j - i) as f64 * dx / c.hbar;
                let turns = ((predicted - step) / (2.0 * PI)).round();
                let increment = step + 2.0 * PI * turns;
                let adjacent_jump = j == i + 1 && increment.abs() > 0.5 * PI;
                if adjacent_jump || (increment - predicted).abs() > 0.5 * PI {
                    return Err(Error::PhaseUnwrap { x: grid.x(j) });
                }
                phase[j] = phase[i] + c.hbar * increment;
            }
        }
        last = Some(j);
    }
    let first = valid.iter().position(|&v| v).unwrap_or(0);
    for j in 0..first {
        phase[j] = phase[first];
    }

    let mut fields = HydroFields {
        grid,
        constants: c,
        rho,
        phase,
        osmotic,
        current,
        osmotic_gradient,
        flux,
        valid,
    };
    let q_mean = fields.mean(|j| fields.grid.x(j));
    fields.pin_phase(q_mean, 0.0);
    Ok(fields)
}

/// Replaces values outside the valid mask by the nearest valid value on the
/// left (or right, before the first valid point).
fn extrapolate_constant(field: &mut [f64], valid: &[bool]) {
    let first = valid.iter().position(|&v| v).unwrap_or(0);
    let mut carry = field[first];
    for j in 0..field.len() {
        if valid[j] {
            carry = field[j];
        } else {
            field[j] = carry;
        }
    }
}

/// (v₊, v₋) = (v + u, v − u).
pub fn drifts(h: &HydroFields) -> (Vec<f64>, Vec<f64>) {
    let forward = h.current.iter().zip(&h.osmotic).map(|(v, u)| v + u).collect();
    let backward = h.current.iter().zip(&h.osmotic).map(|(v, u)| v - u).collect();
    (forward, backward)
}

/// ∂ₜρ + ∂ₓ(ρv) given an externally estimated ∂ₜρ.
pub fn continuity_residual(h: &HydroFields, rho_dot: &[f64]) -> Result<Vec<f64>> {
    let div = h.grid.derivative(&h.flux, 1)?;
    if rho_dot.len() != div.len() {
        return Err(Error::ShapeMismatch { expected: div.len(), got: rho_dot.len() });
    }
    Ok(rho_dot.iter().zip(&div).map(|(a, b)| a + b).collect())
}

/// ∂ₜS + (m/2)v² − (m/2)u² − (ħ/2)∂ₓu + Φ(x, t) given an externally
/// estimated ∂ₜS.
pub fn hjm_residual(h: &HydroFields, phase_rate: &[f64], potential: &dyn PotentialModel, t: f64) -> Result<Vec<f64>> {
    let n = h.rho.len();
    if phase_rate.len() != n {
        return Err(Error::ShapeMismatch { expected: n, got: phase_rate.len() });
    }
    let (m, hbar) = (h.constants.mass, h.constants.hbar);
    Ok((0..n)
        .map(|j| {
            phase_rate[j] + 0.5 * m * h.current[j].powi(2) - 0.5 * m * h.osmotic[j].powi(2)
                - 0.5 * hbar * h.osmotic_gradient[j]
                + potential.phi(h.grid.x(j), t)
        })
        .collect())
}

/// Centred estimate of ∂ₜρ at the middle of two frames `2·dt` apart.
pub fn density_rate(prev: &WaveFunction, next: &WaveFunction, dt: f64) -> Vec<f64> {
    prev.psi()
        .iter()
        .zip(next.psi())
        .map(|(a, b)| (b.norm_sqr() - a.norm_sqr()) / (2.0 * dt))
        .collect()
}

/// Centred estimate of ∂ₜS at the middle of two frames `2·dt` apart,
/// independent of any phase unwrapping or pinning.
pub fn phase_rate(prev: &WaveFunction, next: &WaveFunction, dt: f64) -> Vec<f64> {
    let hbar = prev.constants().hbar;
    prev.psi()
        .iter()
        .zip(next.psi())
        .map(|(a, b): (&Complex64, &Complex64)| hbar * (b * a.conj()).arg() / (2.0 * dt))
        .collect()
}

/// The three members of (Δq̂)²(Δp̂)² ≥ m²(Δq)²(Δu)² ≥ ħ²/4 for one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UncertaintyChain {
    pub heisenberg: f64,
    pub osmotic: f64,
    pub bound: f64,
    /// m²[(Δu)² + (Δv)²], which equals (Δp̂)².
    pub momentum_from_velocities: f64,
    pub momentum_spread_sq: f64,
}

impl UncertaintyChain {
    /// Both inequalities hold up to `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.heisenberg >= self.osmotic - tol && self.osmotic >= self.bound - tol
    }

    /// How far the weaker of the two links is from failing (negative if it fails).
    pub fn margin(&self) -> f64 {
        (self.heisenberg - self.osmotic).min(self.osmotic - self.bound)
    }
}

pub fn uncertainty_chain(wf: &WaveFunction, rho_floor: f64) -> Result<UncertaintyChain> {
    uncertainty_chain_within(wf, rho_floor, BOUNDARY_TOL)
}

/// [`uncertainty_chain`] accepting edge amplitudes up to `leakage`.
pub fn uncertainty_chain_within(wf: &WaveFunction, rho_floor: f64, leakage: f64) -> Result<UncertaintyChain> {
    let o = observables_within(wf, leakage)?;
    let h = decompose(wf, rho_floor)?;
    let m = h.constants.mass;
    let du = h.osmotic_spread();
    let dv = h.current_spread();
    Ok(UncertaintyChain {
        heisenberg: (o.dq * o.dp).powi(2),
        osmotic: (m * o.dq * du).powi(2),
        bound: 0.25 * h.constants.hbar.powi(2),
        momentum_from_velocities: m * m * (du * du + dv * dv),
        momentum_spread_sq: o.dp * o.dp,
    })
}
