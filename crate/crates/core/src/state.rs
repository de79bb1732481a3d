//! Trajectory data and assembly of coherent-state wavefunctions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{observables, Grid1D, WaveFunction};
use crate::profile::StateProfile;

/// Finite-dimensional state of a coherent packet: centre, mean velocity,
/// dispersion, its rate, and the classical phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub q_mean: f64,
    pub v_mean: f64,
    pub dq: f64,
    pub dq_dot: f64,
    pub s0: f64,
}

impl TrajectoryState {
    pub fn new(t: f64, q_mean: f64, v_mean: f64, dq: f64, dq_dot: f64, s0: f64) -> Result<Self> {
        let s = Self { t, q_mean, v_mean, dq, dq_dot, s0 };
        s.validate()?;
        Ok(s)
    }

    /// Packet at rest at the origin with dispersion `dq`.
    pub fn at_rest(dq: f64) -> Self {
        Self { t: 0.0, q_mean: 0.0, v_mean: 0.0, dq, dq_dot: 0.0, s0: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.t, self.q_mean, self.v_mean, self.dq, self.dq_dot, self.s0];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: self.t });
        }
        if !(self.dq > 0.0) {
            return Err(Error::InvalidInput(format!("dispersion must be positive, got {}", self.dq)));
        }
        Ok(())
    }
}

/// Builds ψ(x) = √(ρ̃(ξ)/Δq) · exp(i[m⟨v⟩x + (m/2)(x−⟨q⟩)² Δq̇/Δq + S₀]/ħ),
/// ξ = (x − ⟨q⟩)/Δq. The result is normalized by construction; the packet
/// must clear the grid edges.
pub fn assemble_state(profile: &StateProfile, traj: &TrajectoryState, grid: &Grid1D) -> Result<WaveFunction> {
    traj.validate()?;
    let c = profile.constants();
    let (m, hbar) = (c.mass, c.hbar);
    let amp_scale = traj.dq.sqrt().recip();
    let curvature = 0.5 * m * traj.dq_dot / traj.dq;
    let wf = WaveFunction::from_fn(grid.clone(), c, |x| {
        let y = x - traj.q_mean;
        let xi = y / traj.dq;
        let amp = (0.5 * profile.log_derivatives(xi)[0]).exp() * amp_scale;
        let phase = (m * traj.v_mean * x + curvature * y * y + traj.s0) / hbar;
        Complex64::from_polar(amp, phase)
    })?;
    wf.check_boundary(crate::grid::BOUNDARY_TOL)?;
    wf.validate()?;
    Ok(wf)
}

/// Both sides of (Δq̂)²(Δp̂)² = m²K + L² with L = m Δq Δq̇: the left side
/// measured on the assembled state, the right side from the profile.
pub fn uncertainty_identity(profile: &StateProfile, traj: &TrajectoryState, grid: &Grid1D) -> Result<(f64, f64)> {
    let wf = assemble_state(profile, traj, grid)?;
    let o = observables(&wf)?;
    Ok((o.uncertainty_product().powi(2), uncertainty_identity_rhs(profile, traj)))
}

/// m²K + (m Δq Δq̇)².
pub fn uncertainty_identity_rhs(profile: &StateProfile, traj: &TrajectoryState) -> f64 {
    let m = profile.constants().mass;
    let l = m * traj.dq * traj.dq_dot;
    m * m * profile.osmotic_moment() + l * l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhysConstants;

    fn gaussian() -> StateProfile {
        StateProfile::gaussian(PhysConstants::natural())
    }

    #[test]
    fn identity_case_is_the_harmonic_ground_state() {
        let grid = Grid1D::default();
        let d0 = 0.5f64.sqrt();
        let wf = assemble_state(&gaussian(), &TrajectoryState::at_rest(d0), &grid).unwrap();
        let norm = std::f64::consts::PI.powf(-0.25);
        for (x, z) in grid.points().iter().zip(wf.psi()) {
            assert!((z.re - norm * (-x * x / 2.0).exp()).abs() < 1e-14);
            assert!(z.im.abs() < 1e-14);
        }
        assert!((wf.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boost_and_anticommutator() {
        let grid = Grid1D::default();
        let traj = TrajectoryState::new(0.0, 0.0, 1.0, 0.7, 0.3, 0.0).unwrap();
        let o = observables(&assemble_state(&gaussian(), &traj, &grid).unwrap()).unwrap();
        assert!((o.p_mean - 1.0).abs() < 1e-10);
        assert!((o.anticom - 0.21).abs() < 1e-6 * 0.21);
        assert!((o.dq - 0.7).abs() < 1e-10);
    }

    #[test]
    fn squeezing_identity() {
        let grid = Grid1D::default();
        let (lhs, rhs) = uncertainty_identity(&gaussian(), &TrajectoryState::at_rest(0.5f64.sqrt()), &grid).unwrap();
        assert!((lhs - 0.25).abs() < 1e-10 && (rhs - 0.25).abs() < 1e-15);

        let traj = TrajectoryState::new(0.0, 0.4, -0.2, 0.7, 0.3, 1.1).unwrap();
        let (lhs, rhs) = uncertainty_identity(&gaussian(), &traj, &grid).unwrap();
        assert!((rhs - 0.2941).abs() < 1e-12);
        assert!((lhs - rhs).abs() < 1e-6 * rhs);

        let sech = StateProfile::sech2(PhysConstants::natural());
        let traj = TrajectoryState::at_rest(1.1);
        let (lhs, rhs) = uncertainty_identity(&sech, &traj, &Grid1D::new(-40.0, 40.0, 2048).unwrap()).unwrap();
        assert!((lhs - sech.osmotic_moment()).abs() < 1e-6 * rhs);
    }

    #[test]
    fn rejects_packets_that_leave_the_box() {
        let grid = Grid1D::default();
        let traj = TrajectoryState::new(0.0, 17.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(assemble_state(&gaussian(), &traj, &grid), Err(Error::BoundaryLeakage { .. })));
        assert!(TrajectoryState::new(0.0, 0.0, 0.0, -1.0, 0.0, 0.0).is_err());
    }
}
