//! Feedback potential that keeps a coherent packet coherent: the
//! Hamilton-Jacobi-Madelung equation solved for Φ given the closed-form
//! density and phase along a recorded trajectory.

use std::sync::Arc;

use crate::dynamics::{TrajectoryPoint, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::potential::{PotentialKind, PotentialModel};
use crate::profile::StateProfile;

/// Φ(x, t) = −∂ₜS − (m/2)v² + (m/2)u² + (ħ/2)∂ₓu with S, v, u the fields
/// of the assembled state along a trajectory record. The additive time
/// function is inherited from the record's classical phase, so that Φ at
/// the packet centre equals the potential the record was integrated in.
#[derive(Clone, Debug)]
pub struct SynthesizedPotential {
    profile: Arc<StateProfile>,
    record: Arc<TrajectoryRecord>,
}

impl SynthesizedPotential {
    pub fn new(profile: Arc<StateProfile>, record: Arc<TrajectoryRecord>) -> Result<Self> {
        if record.len() < 2 {
            return Err(Error::InvalidInput("synthesis needs at least two trajectory samples".into()));
        }
        if record.step() > 1e-2 {
            return Err(Error::InvalidInput(format!(
                "trajectory record too coarse for synthesis (step {} > 1e-2)",
                record.step()
            )));
        }
        Ok(Self { profile, record })
    }

    pub fn record(&self) -> &TrajectoryRecord {
        &self.record
    }

    fn point(&self, t: f64) -> TrajectoryPoint {
        let t = t.clamp(self.record.start(), self.record.end());
        self.record.state_at(t).expect("time clamped to the record span")
    }

    fn phi_at(&self, p: &TrajectoryPoint, x: f64) -> f64 {
        let s = &p.state;
        let c = self.profile.constants();
        let (m, hbar) = (c.mass, c.hbar);
        let (d, dd) = (s.dq, s.dq_dot);
        let xi = (x - s.q_mean) / d;
        let g = self.profile.g_derivatives(xi);
        let phase_rate = m * p.v_dot * x - m * s.v_mean * dd * xi + 0.5 * m * xi * xi * (d * p.dq_ddot - dd * dd) + p.s0_dot;
        let v = s.v_mean + xi * dd;
        let u = g[0] / d;
        let du = g[1] / (d * d);
        -phase_rate - 0.5 * m * v * v + 0.5 * m * u * u + 0.5 * hbar * du
    }

    /// Φ and ∂ₓΦ at (x, t), failing outside the recorded span.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        self.validate_time(t)?;
        Ok((self.phi(x, t), self.grad_phi(x, t)))
    }
}

impl PotentialModel for SynthesizedPotential {
    fn phi(&self, x: f64, t: f64) -> f64 {
        self.phi_at(&self.point(t), x)
    }

    fn sample(&self, xs: &[f64], t: f64) -> Vec<f64> {
        let p = self.point(t);
        xs.iter().map(|&x| self.phi_at(&p, x)).collect()
    }

    fn grad_phi(&self, x: f64, t: f64) -> f64 {
        let p = self.point(t);
        let s = &p.state;
        let c = self.profile.constants();
        let d = s.dq;
        let xi = (x - s.q_mean) / d;
        let g = self.profile.g_derivatives(xi);
        -c.mass * (p.v_dot + xi * p.dq_ddot) + (c.mass * g[0] * g[1] + 0.5 * c.hbar * g[2]) / d.powi(3)
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::SynthesizedTable
    }

    fn validate_time(&self, t: f64) -> Result<()> {
        let (start, end) = (self.record.start(), self.record.end());
        let slack = 1e-12 * (end - start).abs().max(1.0);
        if t < start - slack || t > end + slack {
            return Err(Error::OutOfTimeSpan { t, start, end });
        }
        Ok(())
    }
}
