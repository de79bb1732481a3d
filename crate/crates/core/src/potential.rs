//! External potentials Φ(x, t).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::PhysConstants;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Harmonic,
    TimeHarmonic,
    Polynomial,
    PoschlTeller,
    SynthesizedTable,
}

/// An evaluable potential with its spatial gradient.
pub trait PotentialModel: Send + Sync + fmt::Debug {
    fn phi(&self, x: f64, t: f64) -> f64;

    fn grad_phi(&self, x: f64, t: f64) -> f64;

    fn kind(&self) -> PotentialKind;

    /// True when Φ does not depend on time.
    fn is_static(&self) -> bool {
        false
    }

    /// Rejects times at which the potential is not defined.
    fn validate_time(&self, _t: f64) -> Result<()> {
        Ok(())
    }

    /// Coefficients c_k of Φ(x, t) = Σ c_k x^k when the potential is a
    /// polynomial in x; enables exact profile-moment expectations.
    fn polynomial_coefficients(&self, _t: f64) -> Option<Vec<f64>> {
        None
    }

    /// Φ at many points at one time.
    fn sample(&self, xs: &[f64], t: f64) -> Vec<f64> {
        xs.iter().map(|&x| self.phi(x, t)).collect()
    }
}

fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn eval_poly_derivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c)
}

/// Φ(x) = Σ c_k x^k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Φ = 0.
    pub fn free() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// Φ = λ x⁴.
    pub fn quartic(lambda: f64) -> Self {
        Self { coeffs: vec![0.0, 0.0, 0.0, 0.0, lambda] }
    }
}

impl PotentialModel for Polynomial {
    fn phi(&self, x: f64, _t: f64) -> f64 {
        eval_poly(&self.coeffs, x)
    }

    fn grad_phi(&self, x: f64, _t: f64) -> f64 {
        eval_poly_derivative(&self.coeffs, x)
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::Polynomial
    }

    fn is_static(&self) -> bool {
        true
    }

    fn polynomial_coefficients(&self, _t: f64) -> Option<Vec<f64>> {
        Some(self.coeffs.clone())
    }
}

/// Φ = ½ m ω² (x − center)².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub mass: f64,
    pub omega: f64,
    pub center: f64,
}

impl Harmonic {
    pub fn new(constants: PhysConstants, omega: f64) -> Self {
        Self { mass: constants.mass, omega, center: 0.0 }
    }

    /// Ground-state dispersion √(ħ/2mω).
    pub fn ground_dispersion(&self, hbar: f64) -> f64 {
        (hbar / (2.0 * self.mass * self.omega)).sqrt()
    }
}

impl PotentialModel for Harmonic {
    fn phi(&self, x: f64, _t: f64) -> f64 {
        0.5 * self.mass * self.omega.powi(2) * (x - self.center).powi(2)
    }

    fn grad_phi(&self, x: f64, _t: f64) -> f64 {
        self.mass * self.omega.powi(2) * (x - self.center)
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::Harmonic
    }

    fn is_static(&self) -> bool {
        true
    }

    fn polynomial_coefficients(&self, _t: f64) -> Option<Vec<f64>> {
        let k = self.mass * self.omega.powi(2);
        Some(vec![0.5 * k * self.center.powi(2), -k * self.center, 0.5 * k])
    }
}

/// Frequency protocol ω(t) of a time-dependent harmonic well.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OmegaSchedule {
    Constant { omega: f64 },
    /// ω jumps from `before` to `after` at `at` (the new value applies for t ≥ at).
    Quench { before: f64, after: f64, at: f64 },
    /// ω(t) = ω₀ [1 + ε sin(ν t)].
    Modulated { omega0: f64, depth: f64, rate: f64 },
}

impl OmegaSchedule {
    pub fn omega(&self, t: f64) -> f64 {
        match *self {
            OmegaSchedule::Constant { omega } => omega,
            OmegaSchedule::Quench { before, after, at } => {
                if t < at {
                    before
                } else {
                    after
                }
            }
            OmegaSchedule::Modulated { omega0, depth, rate } => omega0 * (1.0 + depth * (rate * t).sin()),
        }
    }
}

/// Φ = ½ m ω(t)² x².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeHarmonic {
    pub mass: f64,
    pub schedule: OmegaSchedule,
}

impl TimeHarmonic {
    pub fn quench(constants: PhysConstants, before: f64, after: f64) -> Self {
        Self {
            mass: constants.mass,
            schedule: OmegaSchedule::Quench { before, after, at: 0.0 },
        }
    }
}

impl PotentialModel for TimeHarmonic {
    fn phi(&self, x: f64, t: f64) -> f64 {
        0.5 * self.mass * self.schedule.omega(t).powi(2) * x * x
    }

    fn grad_phi(&self, x: f64, t: f64) -> f64 {
        self.mass * self.schedule.omega(t).powi(2) * x
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::TimeHarmonic
    }

    fn polynomial_coefficients(&self, t: f64) -> Option<Vec<f64>> {
        Some(vec![0.0, 0.0, 0.5 * self.mass * self.schedule.omega(t).powi(2)])
    }
}

/// Φ = −(ħ²α²/m) sech²(α x), whose ground state is ψ₀ ∝ sech(α x) with
/// energy −ħ²α²/2m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoschlTeller {
    pub alpha: f64,
    pub constants: PhysConstants,
}

impl PoschlTeller {
    pub fn depth(&self) -> f64 {
        self.constants.hbar.powi(2) * self.alpha.powi(2) / self.constants.mass
    }

    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.depth()
    }
}

impl PotentialModel for PoschlTeller {
    fn phi(&self, x: f64, _t: f64) -> f64 {
        let s = 1.0 / (self.alpha * x).cosh();
        -self.depth() * s * s
    }

    fn grad_phi(&self, x: f64, _t: f64) -> f64 {
        let ax = self.alpha * x;
        let s = 1.0 / ax.cosh();
        2.0 * self.depth() * self.alpha * s * s * ax.tanh()
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::PoschlTeller
    }

    fn is_static(&self) -> bool {
        true
    }
}
