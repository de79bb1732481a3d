//! Coupled evolution of centre, mean velocity, dispersion and classical phase.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PhysConstants;
use crate::interp::cubic_hermite;
use crate::potential::PotentialModel;
use crate::profile::StateProfile;
use crate::state::TrajectoryState;

/// Dispersion below which integration stops with a singularity error.
pub const MIN_DISPERSION: f64 = 1e-6;

/// Evolution law used for the dispersion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispersionLaw {
    /// First-moment projection of the Madelung momentum balance:
    /// m Δq Δq̈ = C_G/Δq² − ⟨(x − ⟨q⟩) ∂ₓΦ⟩.
    #[default]
    Projected,
    /// Energy-balance form Δq̈ = [2/(mΔq)]·[−⟨Φ⟩ + (m/2)⟨v⟩² − (m/2)K/Δq²],
    /// kept for comparison; it is not stationary at the harmonic ground state.
    EnergyBalance,
}

impl DispersionLaw {
    pub fn label(&self) -> &'static str {
        match self {
            DispersionLaw::Projected => "projected",
            DispersionLaw::EnergyBalance => "energy-balance",
        }
    }
}

/// ⟨Φ⟩, ⟨∂ₓΦ⟩ and ⟨(x − ⟨q⟩)∂ₓΦ⟩ over the packet density.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PotentialExpectations {
    pub phi_mean: f64,
    pub grad_phi_mean: f64,
    pub torque: f64,
}

fn binomial_row(k: usize) -> [f64; 9] {
    let mut row = [0.0; 9];
    row[0] = 1.0;
    for i in 1..=k {
        row[i] = row[i - 1] * (k + 1 - i) as f64 / i as f64;
    }
    row
}

/// Exact expectations for Φ = Σ c_k x^k of degree ≤ 8, from profile moments.
fn polynomial_expectations(coeffs: &[f64], q: f64, d: f64, mu: &[f64; 9]) -> Option<PotentialExpectations> {
    let deg = coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i);
    if deg > 8 {
        return None;
    }
    let mut qp = [1.0; 9];
    let mut dp = [1.0; 9];
    for i in 1..9 {
        qp[i] = qp[i - 1] * q;
        dp[i] = dp[i - 1] * d;
    }
    // e[k] = ⟨(Q + Dξ)^k⟩, f[k] = ⟨ξ (Q + Dξ)^k⟩
    let mut e = [0.0; 9];
    let mut f = [0.0; 9];
    for k in 0..=deg {
        let row = binomial_row(k);
        for j in 0..=k {
            e[k] += row[j] * qp[k - j] * dp[j] * mu[j];
            if j + 1 < 9 {
                f[k] += row[j] * qp[k - j] * dp[j] * mu[j + 1];
            }
        }
    }
    let mut out = PotentialExpectations::default();
    for (k, c) in coeffs.iter().enumerate().take(deg + 1) {
        out.phi_mean += c * e[k];
        if k > 0 {
            out.grad_phi_mean += k as f64 * c * e[k - 1];
            out.torque += d * k as f64 * c * f[k - 1];
        }
    }
    Some(out)
}

/// Packet expectations of the potential at time `t`. Polynomial potentials
/// use exact moment sums; others use the profile quadrature with a
/// resolution-halving convergence check.
pub fn potential_expectations(
    profile: &StateProfile,
    traj: &TrajectoryState,
    potential: &dyn PotentialModel,
    t: f64,
) -> Result<PotentialExpectations> {
    let (q, d) = (traj.q_mean, traj.dq);
    if let Some(exact) = potential
        .polynomial_coefficients(t)
        .and_then(|c| polynomial_expectations(&c, q, d, profile.moments()))
    {
        return Ok(exact);
    }
    Ok(PotentialExpectations {
        phi_mean: profile.expect_checked(|xi| potential.phi(q + d * xi, t))?,
        grad_phi_mean: profile.expect_checked(|xi| potential.grad_phi(q + d * xi, t))?,
        torque: profile.expect_checked(|xi| d * xi * potential.grad_phi(q + d * xi, t))?,
    })
}

/// Time derivatives of a [`TrajectoryState`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRate {
    pub q_dot: f64,
    pub v_dot: f64,
    pub dq_dot: f64,
    pub dq_ddot: f64,
    pub s0_dot: f64,
}

/// Right-hand side of the coupled system. The classical phase follows from
/// requiring the Hamilton-Jacobi-Madelung equation to hold at the packet
/// centre.
pub fn rhs(
    traj: &TrajectoryState,
    profile: &StateProfile,
    potential: &dyn PotentialModel,
    law: DispersionLaw,
    t: f64,
) -> Result<(TrajectoryRate, PotentialExpectations)> {
    if !(traj.dq >= MIN_DISPERSION) {
        return Err(Error::Singularity { t, dq: traj.dq });
    }
    let c = profile.constants();
    let (m, hbar) = (c.mass, c.hbar);
    let ex = potential_expectations(profile, traj, potential, t)?;
    let d = traj.dq;
    let v_dot = -ex.grad_phi_mean / m;
    let dq_ddot = match law {
        DispersionLaw::Projected => (profile.dispersion_force_moment() / (d * d) - ex.torque) / (m * d),
        DispersionLaw::EnergyBalance => {
            2.0 / (m * d)
                * (-ex.phi_mean + 0.5 * m * traj.v_mean.powi(2) - 0.5 * m * profile.osmotic_moment() / (d * d))
        }
    };
    let s0_dot = -m * v_dot * traj.q_mean - 0.5 * m * traj.v_mean.powi(2)
        + 0.5 * m * profile.g0().powi(2) / (d * d)
        + 0.5 * hbar * profile.g0_prime() / (d * d)
        - potential.phi(traj.q_mean, t);
    let rate = TrajectoryRate { q_dot: traj.v_mean, v_dot, dq_dot: traj.dq_dot, dq_ddot, s0_dot };
    Ok((rate, ex))
}

/// [∂ₓΦ(⟨q⟩) − ⟨∂ₓΦ⟩] − [(m/Δq³) G(0)G′(0) + (ħ/2Δq³) G″(0)]: vanishes when
/// the potential supports coherent transport of the profile.
pub fn feedback_diagnostic(
    profile: &StateProfile,
    traj: &TrajectoryState,
    potential: &dyn PotentialModel,
    t: f64,
) -> Result<f64> {
    let ex = potential_expectations(profile, traj, potential, t)?;
    Ok(feedback_from_expectations(profile, traj, potential, t, &ex))
}

fn feedback_from_expectations(
    profile: &StateProfile,
    traj: &TrajectoryState,
    potential: &dyn PotentialModel,
    t: f64,
    ex: &PotentialExpectations,
) -> f64 {
    let c = profile.constants();
    let d3 = traj.dq.powi(3);
    let osmotic = (c.mass * profile.g0() * profile.g0_prime() + 0.5 * c.hbar * profile.g0_second()) / d3;
    (potential.grad_phi(traj.q_mean, t) - ex.grad_phi_mean) - osmotic
}

/// One recorded node of an integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub state: TrajectoryState,
    pub rate: TrajectoryRate,
    pub expectations: PotentialExpectations,
    pub feedback_residual: f64,
    /// (m/2)(⟨v⟩² + Δq̇²) + C_G/(2Δq²) + ⟨Φ⟩: conserved by the projected
    /// law in static potentials.
    pub energy: f64,
}

/// State, rates and derived quantities interpolated to an arbitrary time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub state: TrajectoryState,
    pub v_dot: f64,
    pub dq_ddot: f64,
    pub s0_dot: f64,
}

/// Output of [`integrate`]: uniformly spaced samples.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    samples: Vec<TrajectorySample>,
    step: f64,
    law: DispersionLaw,
    constants: PhysConstants,
    osmotic_moment: f64,
    reference_dispersion: f64,
}

impl TrajectoryRecord {
    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn law(&self) -> DispersionLaw {
        self.law
    }

    pub fn constants(&self) -> PhysConstants {
        self.constants
    }

    pub fn start(&self) -> f64 {
        self.samples[0].state.t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].state.t
    }

    pub fn last(&self) -> &TrajectorySample {
        &self.samples[self.samples.len() - 1]
    }

    /// Dispersion Δq₀ that the squeeze parameters f, g refer to (the
    /// initial dispersion unless set explicitly).
    pub fn reference_dispersion(&self) -> f64 {
        self.reference_dispersion
    }

    pub fn with_reference_dispersion(mut self, dq0: f64) -> Self {
        self.reference_dispersion = dq0;
        self
    }

    /// Squeezing parameter f = −½ ln(Δq/Δq₀) at sample `i`.
    pub fn squeeze_f(&self, i: usize) -> f64 {
        -0.5 * (self.samples[i].state.dq / self.reference_dispersion).ln()
    }

    /// Rescaling rate g = (m/ħ)(1 − 2f)⁻¹ Δq̇/Δq at sample `i`.
    pub fn squeeze_g(&self, i: usize) -> f64 {
        let s = &self.samples[i].state;
        let c = self.constants;
        (c.mass / c.hbar) * s.dq_dot / (s.dq * (1.0 - 2.0 * self.squeeze_f(i)))
    }

    /// Model value of Δq̂Δp̂ = √(m²K + (mΔqΔq̇)²) at sample `i`.
    pub fn uncertainty_product(&self, i: usize) -> f64 {
        let s = &self.samples[i].state;
        let m = self.constants.mass;
        (m * m * self.osmotic_moment + (m * s.dq * s.dq_dot).powi(2)).sqrt()
    }

    /// The sample whose time equals `t` (to 1e-9 relative).
    pub fn sample_at_time(&self, t: f64) -> Result<&TrajectorySample> {
        let i = ((t - self.start()) / self.step).round();
        if i >= 0.0 && (i as usize) < self.samples.len() {
            let s = &self.samples[i as usize];
            if (s.state.t - t).abs() <= 1e-9 * t.abs().max(1.0) {
                return Ok(s);
            }
        }
        Err(Error::TimeGridMismatch { t })
    }

    /// Cubic Hermite interpolation of ⟨q⟩, ⟨v⟩, Δq, Δq̇ and S₀ using the
    /// recorded rates; linear interpolation of the rates themselves.
    pub fn state_at(&self, t: f64) -> Result<TrajectoryPoint> {
        let (start, end) = (self.start(), self.end());
        let slack = 1e-12 * (end - start).abs().max(1.0);
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutOfTimeSpan { t, start, end });
        }
        let n = self.samples.len();
        if n == 1 {
            let s = &self.samples[0];
            return Ok(TrajectoryPoint { state: s.state, v_dot: s.rate.v_dot, dq_ddot: s.rate.dq_ddot, s0_dot: s.rate.s0_dot });
        }
        let pos = ((t - start) / self.step).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.state.t - a.state.t;
        let s = (t - a.state.t).clamp(0.0, h);
        let w = s / h;
        let herm = |y0: f64, d0: f64, y1: f64, d1: f64| cubic_hermite(y0, d0, y1, d1, h, s);
        let lin = |y0: f64, y1: f64| y0 + w * (y1 - y0);
        let (sa, sb, ra, rb) = (&a.state, &b.state, &a.rate, &b.rate);
        Ok(TrajectoryPoint {
            state: TrajectoryState {
                t,
                q_mean: herm(sa.q_mean, ra.q_dot, sb.q_mean, rb.q_dot),
                v_mean: herm(sa.v_mean, ra.v_dot, sb.v_mean, rb.v_dot),
                dq: herm(sa.dq, ra.dq_dot, sb.dq, rb.dq_dot),
                dq_dot: herm(sa.dq_dot, ra.dq_ddot, sb.dq_dot, rb.dq_ddot),
                s0: herm(sa.s0, ra.s0_dot, sb.s0, rb.s0_dot),
            },
            v_dot: lin(ra.v_dot, rb.v_dot),
            dq_ddot: lin(ra.dq_ddot, rb.dq_ddot),
            s0_dot: lin(ra.s0_dot, rb.s0_dot),
        })
    }

    /// Index of the sample nearest to `t`, clamped to the record.
    pub fn nearest_index(&self, t: f64) -> usize {
        let pos = ((t - self.start()) / self.step).round();
        (pos.max(0.0) as usize).min(self.samples.len() - 1)
    }

    /// Times of all samples.
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }
}

fn advance(y: &TrajectoryState, r: &TrajectoryRate, h: f64, t: f64) -> TrajectoryState {
    TrajectoryState {
        t,
        q_mean: y.q_mean + h * r.q_dot,
        v_mean: y.v_mean + h * r.v_dot,
        dq: y.dq + h * r.dq_dot,
        dq_dot: y.dq_dot + h * r.dq_ddot,
        s0: y.s0 + h * r.s0_dot,
    }
}

fn sample(
    state: TrajectoryState,
    profile: &StateProfile,
    potential: &dyn PotentialModel,
    law: DispersionLaw,
) -> Result<TrajectorySample> {
    let (rate, ex) = rhs(&state, profile, potential, law, state.t)?;
    let m = profile.constants().mass;
    let energy = 0.5 * m * (state.v_mean.powi(2) + state.dq_dot.powi(2))
        + 0.5 * profile.dispersion_force_moment() / state.dq.powi(2)
        + ex.phi_mean;
    let vals = [rate.v_dot, rate.dq_ddot, rate.s0_dot, energy];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: state.t });
    }
    Ok(TrajectorySample {
        state,
        rate,
        expectations: ex,
        feedback_residual: feedback_from_expectations(profile, &state, potential, state.t, &ex),
        energy,
    })
}

/// Classical fourth-order Runge-Kutta integration from `initial.t` to
/// `t_end` with a step close to `dt` that divides the span exactly.
pub fn integrate(
    initial: &TrajectoryState,
    profile: &StateProfile,
    potential: &dyn PotentialModel,
    law: DispersionLaw,
    t_end: f64,
    dt: f64,
) -> Result<TrajectoryRecord> {
    let (record, failure) = integrate_partial(initial, profile, potential, law, t_end, dt)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(record),
    }
}

/// Like [`integrate`], but a failure during stepping (singular dispersion,
/// non-finite values) returns the record up to the failure together with
/// the error instead of discarding it.
pub fn integrate_partial(
    initial: &TrajectoryState,
    profile: &StateProfile,
    potential: &dyn PotentialModel,
    law: DispersionLaw,
    t_end: f64,
    dt: f64,
) -> Result<(TrajectoryRecord, Option<Error>)> {
    initial.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    let span = t_end - initial.t;
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::InvalidInput(format!("end time {t_end} must follow start time {}", initial.t)));
    }
    potential.validate_time(initial.t)?;
    potential.validate_time(t_end)?;
    let steps = ((span / dt).round() as usize).max(1);
    let h = span / steps as f64;
    let t0 = initial.t;

    let mut record = TrajectoryRecord {
        samples: Vec::with_capacity(steps + 1),
        step: h,
        law,
        constants: profile.constants(),
        osmotic_moment: profile.osmotic_moment(),
        reference_dispersion: initial.dq,
    };
    record.samples.push(sample(*initial, profile, potential, law)?);

    for i in 0..steps {
        let cur = record.samples[i];
        let t = cur.state.t;
        let t_next = t0 + (i + 1) as f64 * h;
        let stepped = (|| {
            let k1 = cur.rate;
            let y2 = advance(&cur.state, &k1, 0.5 * h, t + 0.5 * h);
            let (k2, _) = rhs(&y2, profile, potential, law, y2.t)?;
            let y3 = advance(&cur.state, &k2, 0.5 * h, t + 0.5 * h);
            let (k3, _) = rhs(&y3, profile, potential, law, y3.t)?;
            let y4 = advance(&cur.state, &k3, h, t + h);
            let (k4, _) = rhs(&y4, profile, potential, law, y4.t)?;
            let combined = TrajectoryRate {
                q_dot: (k1.q_dot + 2.0 * k2.q_dot + 2.0 * k3.q_dot + k4.q_dot) / 6.0,
                v_dot: (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot) / 6.0,
                dq_dot: (k1.dq_dot + 2.0 * k2.dq_dot + 2.0 * k3.dq_dot + k4.dq_dot) / 6.0,
                dq_ddot: (k1.dq_ddot + 2.0 * k2.dq_ddot + 2.0 * k3.dq_ddot + k4.dq_ddot) / 6.0,
                s0_dot: (k1.s0_dot + 2.0 * k2.s0_dot + 2.0 * k3.s0_dot + k4.s0_dot) / 6.0,
            };
            let next = advance(&cur.state, &combined, h, t_next);
            if [next.q_mean, next.v_mean, next.dq, next.dq_dot, next.s0].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { t: t_next });
            }
            sample(next, profile, potential, law)
        })();
        match stepped {
            Ok(s) => record.samples.push(s),
            Err(e) => return Ok((record, Some(e))),
        }
    }
    Ok((record, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Harmonic, Polynomial, TimeHarmonic};

    fn natural() -> PhysConstants {
        PhysConstants::natural()
    }

    #[test]
    fn harmonic_fixed_point_rates() {
        let p = StateProfile::gaussian(natural());
        let pot = Harmonic::new(natural(), 1.0);
        let (r, _) = rhs(&TrajectoryState::at_rest(0.5f64.sqrt()), &p, &pot, DispersionLaw::Projected, 0.0).unwrap();
        assert_eq!(r.q_dot, 0.0);
        assert_eq!(r.v_dot, 0.0);
        assert_eq!(r.dq_dot, 0.0);
        assert!(r.dq_ddot.abs() <= 1e-12);
        assert!((r.s0_dot + 0.5).abs() <= 1e-15);
        // the energy-balance law is not stationary here
        let (r, _) = rhs(&TrajectoryState::at_rest(0.5f64.sqrt()), &p, &pot, DispersionLaw::EnergyBalance, 0.0).unwrap();
        assert!(r.dq_ddot < -0.1);
    }

    #[test]
    fn free_and_ermakov_rates() {
        let p = StateProfile::gaussian(natural());
        for d in [0.3, 0.8, 1.7] {
            let s = TrajectoryState::at_rest(d);
            let (r, _) = rhs(&s, &p, &Polynomial::free(), DispersionLaw::Projected, 0.0).unwrap();
            assert!((r.dq_ddot - 0.25 / d.powi(3)).abs() < 1e-14);
            let w = 1.3;
            let (r, _) = rhs(&s, &p, &Harmonic::new(natural(), w), DispersionLaw::Projected, 0.0).unwrap();
            assert!((r.dq_ddot - (0.25 / d.powi(3) - w * w * d)).abs() < 1e-12);
        }
    }

    #[test]
    fn expectations_harmonic_free_quartic() {
        let c = natural();
        for p in [StateProfile::gaussian(c), StateProfile::sech2(c)] {
            let s = TrajectoryState { q_mean: 0.7, ..TrajectoryState::at_rest(0.9) };
            let ex = potential_expectations(&p, &s, &Harmonic::new(c, 1.5), 0.0).unwrap();
            assert!((ex.grad_phi_mean - 2.25 * 0.7).abs() < 1e-8);
            assert!((ex.torque - 2.25 * 0.81).abs() < 1e-8);
            let ex = potential_expectations(&p, &s, &Polynomial::free(), 0.0).unwrap();
            assert_eq!(ex, PotentialExpectations::default());
        }
        // quartic, Gaussian at the origin: torque = 4λΔq⁴⟨ξ⁴⟩ = 12λΔq⁴
        let p = StateProfile::gaussian(c);
        let s = TrajectoryState::at_rest(0.8);
        let lambda = 0.3;
        let ex = potential_expectations(&p, &s, &Polynomial::quartic(lambda), 0.0).unwrap();
        assert_eq!(ex.grad_phi_mean, 0.0);
        assert!((ex.torque - 12.0 * lambda * 0.8f64.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn polynomial_route_matches_quadrature() {
        #[derive(Debug)]
        struct Opaque(Polynomial);
        impl PotentialModel for Opaque {
            fn phi(&self, x: f64, t: f64) -> f64 {
                self.0.phi(x, t)
            }
            fn grad_phi(&self, x: f64, t: f64) -> f64 {
                self.0.grad_phi(x, t)
            }
            fn kind(&self) -> crate::potential::PotentialKind {
                self.0.kind()
            }
        }
        let poly = Polynomial::new(vec![0.2, -0.4, 0.6, 0.05, 0.02]);
        let c = natural();
        for p in [StateProfile::gaussian(c), StateProfile::sech2(c)] {
            let s = TrajectoryState { q_mean: -0.6, ..TrajectoryState::at_rest(0.75) };
            let a = potential_expectations(&p, &s, &poly, 0.0).unwrap();
            let b = potential_expectations(&p, &s, &Opaque(poly.clone()), 0.0).unwrap();
            assert!((a.phi_mean - b.phi_mean).abs() < 1e-9);
            assert!((a.grad_phi_mean - b.grad_phi_mean).abs() < 1e-9);
            assert!((a.torque - b.torque).abs() < 1e-9);
        }
    }

    #[test]
    fn feedback_residual_vanishes_by_symmetry() {
        let c = natural();
        let p = StateProfile::gaussian(c);
        let s = TrajectoryState { q_mean: 1.2, ..TrajectoryState::at_rest(0.6) };
        assert!(feedback_diagnostic(&p, &s, &Harmonic::new(c, 1.0), 0.0).unwrap().abs() < 1e-10);
        let s = TrajectoryState::at_rest(0.6);
        assert!(feedback_diagnostic(&p, &s, &Polynomial::quartic(0.2), 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn harmonic_coherent_motion() {
        let c = natural();
        let p = StateProfile::gaussian(c);
        let d0 = 0.5f64.sqrt();
        let init = TrajectoryState { q_mean: 1.0, ..TrajectoryState::at_rest(d0) };
        let rec = integrate(&init, &p, &Harmonic::new(c, 1.0), DispersionLaw::Projected, 2.0 * std::f64::consts::TAU, 1e-3).unwrap();
        for s in rec.samples() {
            assert!((s.state.q_mean - s.state.t.cos()).abs() < 1e-8);
            assert!((s.state.dq - d0).abs() < 1e-12);
        }
        let e0 = rec.samples()[0].energy;
        assert!(rec.samples().iter().all(|s| (s.energy - e0).abs() < 1e-10));
    }

    #[test]
    fn free_spreading_and_quench_closed_forms() {
        let c = natural();
        let p = StateProfile::gaussian(c);
        let d0 = 0.5f64.sqrt();
        let rec = integrate(&TrajectoryState::at_rest(d0), &p, &Polynomial::free(), DispersionLaw::Projected, 5.0, 1e-3).unwrap();
        for s in rec.samples() {
            let exact = d0 * d0 + (s.state.t / (2.0 * d0)).powi(2);
            assert!((s.state.dq.powi(2) - exact).abs() < 1e-8);
        }
        let quench = TimeHarmonic::quench(c, 1.0, 2.0);
        let rec = integrate(&TrajectoryState::at_rest(d0), &p, &quench, DispersionLaw::Projected, 2.0 * std::f64::consts::PI, 1e-3).unwrap();
        for s in rec.samples() {
            let t = s.state.t;
            let exact = 0.5 * ((2.0 * t).cos().powi(2) + 0.25 * (2.0 * t).sin().powi(2));
            assert!((s.state.dq.powi(2) - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn interpolation_between_samples() {
        let c = natural();
        let p = StateProfile::gaussian(c);
        let init = TrajectoryState { q_mean: 1.0, ..TrajectoryState::at_rest(0.5f64.sqrt()) };
        let rec = integrate(&init, &p, &Harmonic::new(c, 1.0), DispersionLaw::Projected, 1.0, 1e-2).unwrap();
        let pt = rec.state_at(0.4567).unwrap();
        assert!((pt.state.q_mean - 0.4567f64.cos()).abs() < 1e-8);
        assert!((pt.state.v_mean + 0.4567f64.sin()).abs() < 1e-8);
        assert!((pt.v_dot + 0.4567f64.cos()).abs() < 1e-4);
        assert!(matches!(rec.state_at(1.5), Err(Error::OutOfTimeSpan { .. })));
        assert!(rec.sample_at_time(0.3).is_ok());
        assert!(matches!(rec.sample_at_time(0.305), Err(Error::TimeGridMismatch { .. })));
    }

    #[test]
    fn singular_collapse_is_reported() {
        let c = natural();
        let p = StateProfile::gaussian(c);
        let (rec, err) = integrate_partial(
            &TrajectoryState::at_rest(0.5f64.sqrt()),
            &p,
            &TimeHarmonic::quench(c, 1.0, 2.0),
            DispersionLaw::EnergyBalance,
            10.0,
            1e-3,
        )
        .unwrap();
        assert!(matches!(err, Some(Error::Singularity { .. }) | Some(Error::NonFinite { .. })));
        assert!(rec.len() > 1 && rec.end() < 10.0);
    }
}
