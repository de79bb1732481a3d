//! Split-step spectral propagation of the time-dependent Schrödinger
//! equation, used as the reference for every dynamical claim.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::grid::{observables, observables_within, Grid1D, WaveFunction, BOUNDARY_TOL};
use crate::potential::PotentialModel;
use crate::profile::StateProfile;
use crate::state::assemble_state;

/// Default oracle step.
pub const DEFAULT_ORACLE_DT: f64 = 2.5e-4;
/// Edge amplitude above which propagation aborts.
pub const LEAKAGE_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropagatorConfig {
    pub dt: f64,
    /// A frame is emitted every `output_stride` steps (and at the end).
    pub output_stride: usize,
    pub leakage_threshold: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { dt: DEFAULT_ORACLE_DT, output_stride: 4, leakage_threshold: LEAKAGE_THRESHOLD }
    }
}

impl PropagatorConfig {
    pub fn new(dt: f64, output_stride: usize) -> Result<Self> {
        let cfg = Self { dt, output_stride, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("oracle time step must be positive, got {}", self.dt)));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidInput("output stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Frame {
    pub t: f64,
    pub state: WaveFunction,
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub frames: Vec<Frame>,
    pub steps: usize,
    /// Actual step, the requested one adjusted to divide the span.
    pub step: f64,
    /// Largest |‖ψ‖² − ‖ψ₀‖²| seen at any frame.
    pub max_norm_drift: f64,
}

impl Propagation {
    pub fn last(&self) -> &Frame {
        &self.frames[self.frames.len() - 1]
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }
}

fn kinetic_phases(grid: &Grid1D, hbar: f64, mass: f64, tau: Complex64) -> Vec<Complex64> {
    // exp(−i τ ħ k²/2m) for real τ = dt, exp(−τ ħ k²/2m) for τ = −i dt
    grid.wavenumbers()
        .iter()
        .map(|k| (-Complex64::i() * tau * hbar * k * k / (2.0 * mass)).exp())
        .collect()
}

/// Strang splitting e^{−iVh/2ħ} e^{−iTh/ħ} e^{−iVh/2ħ}, with V sampled at
/// the midpoint of each step.
pub fn propagate(wf0: &WaveFunction, potential: &dyn PotentialModel, cfg: &PropagatorConfig, t_span: (f64, f64)) -> Result<Propagation> {
    cfg.validate()?;
    wf0.validate()?;
    let (t0, t1) = t_span;
    let span = t1 - t0;
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid time span [{t0}, {t1}]")));
    }
    potential.validate_time(t0)?;
    potential.validate_time(t1)?;
    let steps = ((span / cfg.dt).round() as usize).max(1);
    let h = span / steps as f64;
    let grid = wf0.grid().clone();
    let c = wf0.constants();
    let xs = grid.points();
    let kinetic = kinetic_phases(&grid, c.hbar, c.mass, Complex64::new(h, 0.0));
    let half_phase = |t: f64| -> Vec<Complex64> {
        potential.sample(&xs, t).into_iter().map(|v| Complex64::from_polar(1.0, -0.5 * v * h / c.hbar)).collect()
    };
    let static_phase = potential.is_static().then(|| half_phase(t0));

    let norm0 = wf0.norm_sqr();
    let mut psi = wf0.psi().to_vec();
    let mut frames = vec![Frame { t: t0, state: wf0.clone() }];
    let mut max_norm_drift: f64 = 0.0;
    for step in 1..=steps {
        let t_mid = t0 + (step as f64 - 0.5) * h;
        let owned;
        let vphase = match &static_phase {
            Some(p) => p,
            None => {
                owned = half_phase(t_mid);
                &owned
            }
        };
        psi.iter_mut().zip(vphase).for_each(|(z, w)| *z *= w);
        grid.spectral().forward(&mut psi);
        psi.iter_mut().zip(&kinetic).for_each(|(z, w)| *z *= w);
        grid.spectral().inverse(&mut psi);
        psi.iter_mut().zip(vphase).for_each(|(z, w)| *z *= w);

        let t = t0 + step as f64 * h;
        let edge = psi[..crate::grid::EDGE_CELLS]
            .iter()
            .chain(&psi[psi.len() - crate::grid::EDGE_CELLS..])
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !edge.is_finite() {
            return Err(Error::NonFinite { t });
        }
        if edge > cfg.leakage_threshold {
            return Err(Error::BoundaryLeakage { amplitude: edge, threshold: cfg.leakage_threshold });
        }
        if step % cfg.output_stride == 0 || step == steps {
            let state = WaveFunction::new(grid.clone(), psi.clone(), c)?;
            max_norm_drift = max_norm_drift.max((state.norm_sqr() - norm0).abs());
            frames.push(Frame { t, state });
        }
    }
    Ok(Propagation { frames, steps, step: h, max_norm_drift })
}

/// ⟨ψ|T + Φ(·, t)|ψ⟩ with a spectral kinetic term.
pub fn energy(wf: &WaveFunction, potential: &dyn PotentialModel, t: f64) -> f64 {
    let grid = wf.grid();
    let c = wf.constants();
    let mut buf = wf.psi().to_vec();
    grid.spectral().forward(&mut buf);
    let n = buf.len() as f64;
    // Parseval: Σ|ψ_j|² dx = (dx/n) Σ|ψ̂_k|²
    let kinetic: f64 = buf
        .iter()
        .zip(grid.wavenumbers())
        .map(|(z, k)| z.norm_sqr() * c.hbar * c.hbar * k * k / (2.0 * c.mass))
        .sum::<f64>()
        * grid.dx()
        / n;
    let v = potential.sample(&grid.points(), t);
    let pot: f64 = wf.psi().iter().zip(&v).map(|(z, v)| z.norm_sqr() * v).sum::<f64>() * grid.dx();
    (kinetic + pot) / wf.norm_sqr()
}

/// Imaginary-time split-step relaxation to the ground state of a static
/// potential, starting from `guess`. Stops when the energy changes by less
/// than `tol` over 100 steps.
pub fn relax_ground_state(guess: &WaveFunction, potential: &dyn PotentialModel, dtau: f64, tol: f64, max_steps: usize) -> Result<WaveFunction> {
    if !potential.is_static() {
        return Err(Error::InvalidInput("relaxation needs a static potential".into()));
    }
    if !(dtau > 0.0) {
        return Err(Error::InvalidInput(format!("relaxation step must be positive, got {dtau}")));
    }
    let grid = guess.grid().clone();
    let c = guess.constants();
    let kinetic = kinetic_phases(&grid, c.hbar, c.mass, Complex64::new(0.0, -dtau));
    let half: Vec<f64> = potential.sample(&grid.points(), 0.0).into_iter().map(|v| (-0.5 * v * dtau / c.hbar).exp()).collect();
    let mut wf = guess.clone().normalized()?;
    let mut last = energy(&wf, potential, 0.0);
    for step in 1..=max_steps {
        let mut psi = wf.into_psi();
        psi.iter_mut().zip(&half).for_each(|(z, w)| *z *= w);
        grid.spectral().forward(&mut psi);
        psi.iter_mut().zip(&kinetic).for_each(|(z, w)| *z *= w);
        grid.spectral().inverse(&mut psi);
        psi.iter_mut().zip(&half).for_each(|(z, w)| *z *= w);
        wf = WaveFunction::new(grid.clone(), psi, c)?.normalized()?;
        if step % 100 == 0 {
            let e = energy(&wf, potential, 0.0);
            if (e - last).abs() < tol {
                wf.check_boundary(BOUNDARY_TOL)?;
                return Ok(wf);
            }
            last = e;
        }
    }
    Err(Error::RelaxationNotConverged { delta: (energy(&wf, potential, 0.0) - last).abs() })
}

/// Comparison of one propagated frame with the model state at that time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityRow {
    pub t: f64,
    pub overlap: f64,
    pub density_l2: f64,
    pub q_mean_delta: f64,
    pub dq_delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityReport {
    pub rows: Vec<FidelityRow>,
}

impl FidelityReport {
    pub fn min_overlap(&self) -> f64 {
        self.rows.iter().map(|r| r.overlap).fold(f64::INFINITY, f64::min)
    }

    pub fn max_q_delta(&self) -> f64 {
        self.rows.iter().map(|r| r.q_mean_delta.abs()).fold(0.0, f64::max)
    }

    pub fn max_dq_delta(&self) -> f64 {
        self.rows.iter().map(|r| r.dq_delta.abs()).fold(0.0, f64::max)
    }
}

/// Compares a single frame with an explicitly given model state.
pub fn compare_frame(frame: &Frame, model: &WaveFunction) -> Result<FidelityRow> {
    let a = observables_within(&frame.state, LEAKAGE_THRESHOLD)?;
    let b = observables(model)?;
    let dx = model.grid().dx();
    let density_l2 = (frame.state.density().iter().zip(model.density()).map(|(p, q)| (p - q).powi(2)).sum::<f64>() * dx).sqrt();
    Ok(FidelityRow {
        t: frame.t,
        overlap: frame.state.overlap(model)?,
        density_l2,
        q_mean_delta: a.q_mean - b.q_mean,
        dq_delta: a.dq - b.dq,
    })
}

/// Per-frame fidelity against states assembled from the record at the
/// frame times, which must be record sample times.
pub fn compare_with_model(frames: &[Frame], profile: &StateProfile, record: &TrajectoryRecord) -> Result<FidelityReport> {
    let mut rows = Vec::with_capacity(frames.len());
    for frame in frames {
        let sample = record.sample_at_time(frame.t)?;
        let model = assemble_state(profile, &sample.state, frame.state.grid())?;
        rows.push(compare_frame(frame, &model)?);
    }
    Ok(FidelityReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, DispersionLaw};
    use crate::grid::PhysConstants;
    use crate::potential::{Harmonic, PoschlTeller, TimeHarmonic};
    use crate::state::TrajectoryState;

    fn natural() -> PhysConstants {
        PhysConstants::natural()
    }

    fn coherent(q: f64, grid: &Grid1D) -> WaveFunction {
        let s = TrajectoryState { q_mean: q, ..TrajectoryState::at_rest(0.5f64.sqrt()) };
        assemble_state(&StateProfile::gaussian(natural()), &s, grid).unwrap()
    }

    #[test]
    fn ground_state_is_stationary() {
        let grid = Grid1D::default();
        let g = coherent(0.0, &grid);
        let well = Harmonic::new(natural(), 1.0);
        let cfg = PropagatorConfig::new(1e-3, 1000).unwrap();
        let run = propagate(&g, &well, &cfg, (0.0, 20.0 * std::f64::consts::PI)).unwrap();
        for f in &run.frames {
            assert!(f.state.overlap(&g).unwrap() >= 1.0 - 1e-9);
        }
        assert!(run.max_norm_drift < 1e-10);
    }

    #[test]
    fn displaced_ground_state_oscillates() {
        let grid = Grid1D::default();
        let well = Harmonic::new(natural(), 1.0);
        let cfg = PropagatorConfig::new(2.5e-4, 400).unwrap();
        let run = propagate(&coherent(1.0, &grid), &well, &cfg, (0.0, 2.0 * std::f64::consts::PI)).unwrap();
        for f in &run.frames {
            let o = observables(&f.state).unwrap();
            assert!((o.q_mean - f.t.cos()).abs() < 1e-6, "t={}", f.t);
            assert!((o.dq - 0.5f64.sqrt()).abs() < 1e-6);
        }
        let e0 = energy(&run.frames[0].state, &well, 0.0);
        let e1 = energy(&run.last().state, &well, 0.0);
        assert!(((e1 - e0) / e0).abs() < 1e-8);
        assert!((e0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quench_matches_closed_form() {
        let grid = Grid1D::default();
        let pot = TimeHarmonic::quench(natural(), 1.0, 2.0);
        let cfg = PropagatorConfig::new(2.5e-4, 100).unwrap();
        let run = propagate(&coherent(0.0, &grid), &pot, &cfg, (0.0, std::f64::consts::PI)).unwrap();
        for f in &run.frames {
            let dq2 = observables(&f.state).unwrap().dq.powi(2);
            let exact = 0.5 * ((2.0 * f.t).cos().powi(2) + 0.25 * (2.0 * f.t).sin().powi(2));
            assert!((dq2 - exact).abs() < 1e-5, "t={}", f.t);
        }
    }

    #[test]
    fn error_is_second_order() {
        let grid = Grid1D::default();
        let pot = TimeHarmonic::quench(natural(), 1.0, 2.0);
        let wf = coherent(1.0, &grid);
        let t = (0.0, 1.0);
        let run = |dt: f64| propagate(&wf, &pot, &PropagatorConfig::new(dt, 1_000_000).unwrap(), t).unwrap().last().state.clone();
        let reference = run(1e-4 / 8.0);
        let e1 = run(1e-2).distance(&reference).unwrap();
        let e2 = run(5e-3).distance(&reference).unwrap();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn leakage_aborts() {
        let grid = Grid1D::symmetric(6.0, 256).unwrap();
        let wf = WaveFunction::from_fn(grid, natural(), |x| Complex64::from_polar((-x * x).exp(), 8.0 * x)).unwrap().normalized().unwrap();
        let free = crate::potential::Polynomial::free();
        let err = propagate(&wf, &free, &PropagatorConfig::default(), (0.0, 5.0)).unwrap_err();
        assert!(matches!(err, Error::BoundaryLeakage { .. }));
    }

    #[test]
    fn relaxation_finds_poschl_teller_ground_state() {
        let c = natural();
        let grid = Grid1D::symmetric(30.0, 1024).unwrap();
        let well = PoschlTeller { alpha: 1.0, constants: c };
        let guess = coherent(0.0, &grid);
        let relaxed = relax_ground_state(&guess, &well, 5e-3, 1e-14, 200_000).unwrap();
        let exact = WaveFunction::from_fn(grid, c, |x| Complex64::new(1.0 / x.cosh(), 0.0)).unwrap().normalized().unwrap();
        assert!(relaxed.overlap(&exact).unwrap() > 1.0 - 1e-8);
        assert!((energy(&relaxed, &well, 0.0) - well.ground_energy()).abs() < 1e-5);
    }

    #[test]
    fn comparison_needs_matching_times() {
        let c = natural();
        let grid = Grid1D::default();
        let profile = StateProfile::gaussian(c);
        let well = Harmonic::new(c, 1.0);
        let init = TrajectoryState { q_mean: 1.0, ..TrajectoryState::at_rest(0.5f64.sqrt()) };
        let rec = integrate(&init, &profile, &well, DispersionLaw::Projected, 1.0, 1e-3).unwrap();
        let run = propagate(&coherent(1.0, &grid), &well, &PropagatorConfig::new(2.5e-4, 40).unwrap(), (0.0, 1.0)).unwrap();
        let report = compare_with_model(&run.frames, &profile, &rec).unwrap();
        assert!(report.min_overlap() >= 1.0 - 1e-8);
        let odd = propagate(&coherent(1.0, &grid), &well, &PropagatorConfig::new(2.5e-4, 3).unwrap(), (0.0, 0.01)).unwrap();
        assert!(matches!(compare_with_model(&odd.frames, &profile, &rec), Err(Error::TimeGridMismatch { .. })));
    }
}
