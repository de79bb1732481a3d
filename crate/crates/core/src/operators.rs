//! Displacement and dynamical squeeze operators in the coordinate
//! representation, with a dense matrix-exponential oracle.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::grid::{observables, Grid1D, PhysConstants, WaveFunction, BOUNDARY_TOL};
use crate::hydro::decompose;
use crate::profile::StateProfile;
use crate::state::{assemble_state, TrajectoryState};

/// Largest grid for which dense operator matrices are built.
pub const MAX_DENSE_POINTS: usize = 2048;

/// (D̂ψ)(x) = exp(iS₀/ħ) · exp(i p x/ħ) · ψ(x − q), the shift done exactly
/// on the band-limited interpolant.
pub fn displace(wf: &WaveFunction, q_shift: f64, p_shift: f64, phase_action: f64) -> Result<WaveFunction> {
    let grid = wf.grid();
    let hbar = wf.constants().hbar;
    let mut buf = wf.psi().to_vec();
    grid.spectral().forward(&mut buf);
    let n = buf.len();
    for (j, (z, k)) in buf.iter_mut().zip(grid.wavenumbers()).enumerate() {
        // the Nyquist mode has no unique shift phase; use its real part
        let shift = if j == n / 2 { Complex64::new((k * q_shift).cos(), 0.0) } else { Complex64::from_polar(1.0, -k * q_shift) };
        *z *= shift;
    }
    grid.spectral().inverse(&mut buf);
    for (j, z) in buf.iter_mut().enumerate() {
        *z *= Complex64::from_polar(1.0, (p_shift * grid.x(j) + phase_action) / hbar);
    }
    let out = WaveFunction::new(grid.clone(), buf, wf.constants())?;
    out.check_boundary(BOUNDARY_TOL)?;
    Ok(out)
}

/// Parameters of the dynamical squeeze operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    /// Dynamical squeezing parameter f = −½ ln(Δq/Δq₀).
    pub f: f64,
    /// Rescaling rate g = (m/ħ)(1 − 2f)⁻¹ Δq̇/Δq.
    pub g: f64,
    pub dq0: f64,
    pub dq: f64,
    pub dq_dot: f64,
}

impl SqueezeParams {
    pub fn from_dispersion(dq0: f64, dq: f64, dq_dot: f64, constants: PhysConstants) -> Result<Self> {
        if !(dq0 > 0.0 && dq > 0.0) || !dq_dot.is_finite() {
            return Err(Error::InvalidInput(format!("invalid dispersions dq0={dq0}, dq={dq}, dq_dot={dq_dot}")));
        }
        let f = -0.5 * (dq / dq0).ln();
        let denom = 1.0 - 2.0 * f;
        if denom.abs() < 1e-12 {
            return Err(Error::InvalidInput("1 − 2f vanishes; g is undefined".into()));
        }
        let g = constants.mass / constants.hbar * dq_dot / (dq * denom);
        Ok(Self { f, g, dq0, dq, dq_dot })
    }

    /// Parameters given directly by (f, g); Δq and Δq̇ are derived from them.
    pub fn from_fg(f: f64, g: f64, dq0: f64, constants: PhysConstants) -> Result<Self> {
        if !(dq0 > 0.0) || !f.is_finite() || !g.is_finite() {
            return Err(Error::InvalidInput(format!("invalid squeeze parameters f={f}, g={g}, dq0={dq0}")));
        }
        let dq = dq0 * (-2.0 * f).exp();
        let dq_dot = g * (1.0 - 2.0 * f) * dq * constants.hbar / constants.mass;
        Ok(Self { f, g, dq0, dq, dq_dot })
    }
}

/// Coefficient of the quadratic phase in the closed-form squeezed state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseCoefficient {
    /// (g/Δq₀²)(1 − 2f)e^{4f}, read off the factored exponentials.
    Factorized,
    /// (g/Δq₀²)(e^{4f} − 1)/(4f), the exact disentangling of the dilation
    /// and the quadratic phase (they close under [A, B] = 4fB).
    #[default]
    Disentangled,
}

impl PhaseCoefficient {
    pub fn curvature(&self, p: &SqueezeParams) -> f64 {
        let base = p.g / (p.dq0 * p.dq0);
        match self {
            PhaseCoefficient::Factorized => base * (1.0 - 2.0 * p.f) * (4.0 * p.f).exp(),
            PhaseCoefficient::Disentangled => {
                if p.f == 0.0 {
                    base
                } else {
                    base * (4.0 * p.f).exp_m1() / (4.0 * p.f)
                }
            }
        }
    }
}

/// Normalized closed-form squeezed state with the norm it had before
/// normalization and the quadratic-phase coefficient it used.
#[derive(Clone, Debug)]
pub struct SqueezeOutcome {
    pub state: WaveFunction,
    pub pre_norm: f64,
    pub curvature: f64,
}

/// Ψ(x) = e^f · exp(i c x²) · Ψ₀(e^{2f} x), with c chosen by `coefficient`.
/// Ψ₀ is evaluated on its band-limited interpolant and taken as zero
/// outside its grid.
pub fn squeeze_closed_form(psi0: &WaveFunction, params: &SqueezeParams, coefficient: PhaseCoefficient) -> Result<SqueezeOutcome> {
    let grid = psi0.grid();
    let scale = (2.0 * params.f).exp();
    let xs = grid.points();
    let base: Vec<Complex64> = if params.f == 0.0 {
        psi0.psi().to_vec()
    } else {
        let targets: Vec<f64> = xs.iter().map(|x| scale * x).collect();
        let inside: Vec<f64> = targets.iter().copied().filter(|t| *t >= grid.x_min() && *t <= grid.x_max()).collect();
        let mut vals = psi0.interpolate(&inside).into_iter();
        targets
            .iter()
            .map(|t| if *t >= grid.x_min() && *t <= grid.x_max() { vals.next().unwrap_or_default() } else { Complex64::default() })
            .collect()
    };
    let curvature = coefficient.curvature(params);
    let amp = params.f.exp();
    let psi: Vec<Complex64> = base
        .iter()
        .zip(&xs)
        .map(|(z, x)| z * Complex64::from_polar(amp, curvature * x * x))
        .collect();
    let raw = WaveFunction::new(grid.clone(), psi, psi0.constants())?;
    raw.check_boundary(BOUNDARY_TOL)?;
    let pre_norm = raw.norm_sqr().sqrt();
    Ok(SqueezeOutcome { state: raw.normalized()?, pre_norm, curvature })
}

/// A dense operator on the grid.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub matrix: Array2<Complex64>,
    pub description: String,
}

impl OperatorMatrix {
    pub fn apply(&self, wf: &WaveFunction) -> Result<WaveFunction> {
        let v = Array1::from(wf.psi().to_vec());
        WaveFunction::new(wf.grid().clone(), self.matrix.dot(&v).to_vec(), wf.constants())
    }

    /// max |(U†U − I)ᵢⱼ| over columns at least `edge` points from either end.
    pub fn unitarity_defect(&self, edge: usize) -> f64 {
        let n = self.matrix.nrows();
        let gram = self.matrix.t().mapv(|z| z.conj()).dot(&self.matrix);
        let mut worst: f64 = 0.0;
        for i in edge..n - edge {
            for j in edge..n - edge {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[[i, j]] - target).norm());
            }
        }
        worst
    }
}

fn check_dense(grid: &Grid1D) -> Result<()> {
    if grid.len() > MAX_DENSE_POINTS {
        return Err(Error::InvalidInput(format!(
            "dense operators need at most {MAX_DENSE_POINTS} grid points, got {}",
            grid.len()
        )));
    }
    Ok(())
}

/// Spectral first-derivative matrix (real, antisymmetric).
pub fn derivative_matrix(grid: &Grid1D) -> Result<Array2<f64>> {
    check_dense(grid)?;
    let n = grid.len();
    let mut d = Array2::<f64>::zeros((n, n));
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = grid.derivative(&e, 1)?;
        e[j] = 0.0;
        for (i, v) in col.into_iter().enumerate() {
            d[[i, j]] = v;
        }
    }
    Ok(d)
}

/// Dense {q̂, p̂} = q̂p̂ + p̂q̂ with p̂ = −iħ d/dx.
pub fn anticommutator_matrix(grid: &Grid1D, constants: PhysConstants) -> Result<Array2<Complex64>> {
    let d = derivative_matrix(grid)?;
    let n = grid.len();
    let xs = grid.points();
    let coef = Complex64::new(0.0, -constants.hbar);
    Ok(Array2::from_shape_fn((n, n), |(i, j)| coef * d[[i, j]] * (xs[i] + xs[j])))
}

/// exp(iM) with M = (f/ħ){q̂,p̂} + (g/Δq₀²) q̂², built densely.
pub fn squeeze_matrix_oracle(params: &SqueezeParams, grid: &Grid1D, constants: PhysConstants) -> Result<OperatorMatrix> {
    let mut m = anticommutator_matrix(grid, constants)?;
    m.mapv_inplace(|z| z * (params.f / constants.hbar));
    let quad = params.g / (params.dq0 * params.dq0);
    for (i, x) in grid.points().iter().enumerate() {
        m[[i, i]] += quad * x * x;
    }
    m.mapv_inplace(|z| z * Complex64::i());
    Ok(OperatorMatrix {
        matrix: expm(&m)?,
        description: format!("exp(i[(f/hbar){{q,p}} + (g/dq0^2) q^2]) with f={}, g={}, dq0={}", params.f, params.g, params.dq0),
    })
}

/// Relative size of [{q̂,p̂}, q̂²]ψ + 4iħ q̂²ψ over interior rows, for each
/// test state.
pub fn commutator_defect(grid: &Grid1D, constants: PhysConstants, states: &[WaveFunction], edge: usize) -> Result<Vec<f64>> {
    let a = anticommutator_matrix(grid, constants)?;
    let xs = grid.points();
    let n = grid.len();
    let mut out = Vec::with_capacity(states.len());
    for wf in states {
        let psi = Array1::from(wf.psi().to_vec());
        let b_psi = Array1::from_shape_fn(n, |i| xs[i] * xs[i] * psi[i]);
        let ab = a.dot(&b_psi);
        let a_psi = a.dot(&psi);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in edge..n - edge {
            let target = Complex64::new(0.0, 4.0 * constants.hbar) * b_psi[i];
            num += (ab[i] - xs[i] * xs[i] * a_psi[i] + target).norm_sqr();
            den += target.norm_sqr();
        }
        out.push((num / den).sqrt());
    }
    Ok(out)
}

/// Entrywise relative size of [{q̂,p̂}, q̂²] + 4iħq̂² over interior rows.
/// Finite matrices of unbounded operators cannot satisfy the identity
/// entrywise; this number is reported for information only.
pub fn commutator_matrix_defect(grid: &Grid1D, constants: PhysConstants, edge: usize) -> Result<f64> {
    let a = anticommutator_matrix(grid, constants)?;
    let xs = grid.points();
    let n = grid.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in edge..n - edge {
        for j in 0..n {
            let mut v = a[[i, j]] * (xs[j] * xs[j] - xs[i] * xs[i]);
            if i == j {
                let target = Complex64::new(0.0, 4.0 * constants.hbar * xs[i] * xs[i]);
                v += target;
                den += target.norm_sqr();
            }
            num += v.norm_sqr();
        }
    }
    Ok((num / den).sqrt())
}

/// Weighted least-squares fit of the unwrapped phase (in radians) to
/// a + b(x − x₀) + c(x − x₀)² over points with density above `rel_floor`
/// of its maximum. Returns [a, b, c].
pub fn fit_quadratic_phase(wf: &WaveFunction, x0: f64, rel_floor: f64) -> Result<[f64; 3]> {
    let rho_max = wf.density().into_iter().fold(0.0, f64::max);
    let h = decompose(wf, rho_max * rel_floor)?;
    let hbar = wf.constants().hbar;
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for j in (0..h.rho.len()).filter(|&j| h.valid[j]) {
        let y = wf.grid().x(j) - x0;
        let basis = [1.0, y, y * y];
        let w = h.rho[j];
        for r in 0..3 {
            atb[r] += w * basis[r] * h.phase[j] / hbar;
            for c in 0..3 {
                ata[r][c] += w * basis[r] * basis[c];
            }
        }
    }
    solve3(ata, atb).ok_or_else(|| Error::InvalidInput("phase fit is singular".into()))
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Operator-route state D̂(Ŝψ₀) compared with the directly assembled state.
#[derive(Clone, Debug, Serialize)]
pub struct SqueezedComparison {
    pub params: SqueezeParams,
    pub coefficient: PhaseCoefficient,
    pub overlap: f64,
    pub density_max_diff: f64,
    pub pre_norm: f64,
    /// Fitted quadratic-phase coefficient of the operator-route state.
    pub curvature_operator: f64,
    /// Fitted quadratic-phase coefficient of the assembled state.
    pub curvature_assembled: f64,
    /// m Δq̇/(2ħΔq), the coefficient the assembled state is built with.
    pub curvature_target: f64,
    pub curvature_ratio: f64,
    #[serde(skip)]
    pub state: Option<WaveFunction>,
}

/// Squeezes the ground state ψ₀ to the trajectory's dispersion, displaces
/// it to (⟨q⟩, m⟨v⟩, S₀), and compares with the assembled state.
pub fn squeezed_state(
    psi0: &WaveFunction,
    traj: &TrajectoryState,
    profile: &StateProfile,
    coefficient: PhaseCoefficient,
) -> Result<SqueezedComparison> {
    let c = psi0.constants();
    let dq0 = observables(psi0)?.dq;
    let params = SqueezeParams::from_dispersion(dq0, traj.dq, traj.dq_dot, c)?;
    let squeezed = squeeze_closed_form(psi0, &params, coefficient)?;
    let state = displace(&squeezed.state, traj.q_mean, c.mass * traj.v_mean, traj.s0)?;
    let reference = assemble_state(profile, traj, psi0.grid())?;
    let overlap = state.overlap(&reference)?;
    let density_max_diff = state
        .density()
        .iter()
        .zip(reference.density())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let target = c.mass * traj.dq_dot / (2.0 * c.hbar * traj.dq);
    // the boost contributes m⟨v⟩x/ħ, linear in x, so the quadratic
    // coefficient isolates the squeeze phase
    let fit_op = fit_quadratic_phase(&state, traj.q_mean, 1e-8)?;
    let fit_ref = fit_quadratic_phase(&reference, traj.q_mean, 1e-8)?;
    let ratio = if target != 0.0 { fit_op[2] / target } else { f64::NAN };
    Ok(SqueezedComparison {
        params,
        coefficient,
        overlap,
        density_max_diff,
        pre_norm: squeezed.pre_norm,
        curvature_operator: fit_op[2],
        curvature_assembled: fit_ref[2],
        curvature_target: target,
        curvature_ratio: ratio,
        state: Some(state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural() -> PhysConstants {
        PhysConstants::natural()
    }

    fn ground(grid: &Grid1D) -> WaveFunction {
        assemble_state(&StateProfile::gaussian(natural()), &TrajectoryState::at_rest(0.5f64.sqrt()), grid).unwrap()
    }

    #[test]
    fn displacement_shifts_and_boosts() {
        let grid = Grid1D::default();
        let g = ground(&grid);
        let o0 = observables(&g).unwrap();
        let o = observables(&displace(&g, 1.0, 0.0, 0.0).unwrap()).unwrap();
        assert!((o.q_mean - 1.0).abs() < 1e-12 && (o.dq - o0.dq).abs() < 1e-12);
        let o = observables(&displace(&g, 0.0, 0.7, 0.0).unwrap()).unwrap();
        assert!((o.p_mean - 0.7).abs() < 1e-12 && (o.dp - o0.dp).abs() < 1e-12);
        let moved = displace(&g, 1.3, -0.4, 0.2).unwrap();
        assert!((moved.norm_sqr() - g.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn displacements_compose_up_to_phase() {
        let grid = Grid1D::default();
        let g = ground(&grid);
        let two = displace(&displace(&g, 0.8, 0.3, 0.0).unwrap(), -1.1, 0.5, 0.0).unwrap();
        let one = displace(&g, -0.3, 0.8, 0.0).unwrap();
        let diff = two.psi().iter().zip(one.psi()).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-9);
        assert!(two.phase_aligned_distance(&one).unwrap() < 1e-9);
    }

    #[test]
    fn closed_form_identity_and_dilation() {
        let grid = Grid1D::default();
        let g = ground(&grid);
        let p = SqueezeParams::from_dispersion(0.5f64.sqrt(), 0.5f64.sqrt(), 0.0, natural()).unwrap();
        let out = squeeze_closed_form(&g, &p, PhaseCoefficient::Factorized).unwrap();
        assert_eq!(out.state.psi(), g.psi());

        let d0 = 0.5f64.sqrt();
        let p = SqueezeParams::from_dispersion(d0, 2.0 * d0, 0.0, natural()).unwrap();
        assert!((p.f + 0.5 * 2f64.ln()).abs() < 1e-15);
        let out = squeeze_closed_form(&g, &p, PhaseCoefficient::Factorized).unwrap();
        assert!((observables(&out.state).unwrap().dq - 2.0 * d0).abs() < 1e-6);
        assert!((out.pre_norm - 1.0).abs() < 1e-10);

        let p = SqueezeParams::from_dispersion(d0, 0.7, 0.3, natural()).unwrap();
        let out = squeeze_closed_form(&g, &p, PhaseCoefficient::Disentangled).unwrap();
        assert!((observables(&out.state).unwrap().dq - 0.7).abs() < 1e-6);
    }

    #[test]
    fn coefficients_agree_to_first_order() {
        let c = natural();
        for f in [1e-4, -1e-4] {
            let p = SqueezeParams::from_fg(f, 0.3, 1.0, c).unwrap();
            let a = PhaseCoefficient::Factorized.curvature(&p);
            let b = PhaseCoefficient::Disentangled.curvature(&p);
            assert!((a - b).abs() < 1e-6);
        }
        let p = SqueezeParams::from_fg(0.5, 0.3, 1.0, c).unwrap();
        assert!((PhaseCoefficient::Factorized.curvature(&p) - PhaseCoefficient::Disentangled.curvature(&p)).abs() > 0.1);
    }

    #[test]
    fn oracle_matches_closed_form_small_grid() {
        let c = natural();
        let grid = Grid1D::symmetric(16.0, 512).unwrap();
        let g = ground(&grid);
        for (f, gg) in [(0.3, 0.0), (-0.25, 0.1), (0.0, 0.2)] {
            let p = SqueezeParams::from_fg(f, gg, 0.5f64.sqrt(), c).unwrap();
            let oracle = squeeze_matrix_oracle(&p, &grid, c).unwrap();
            let exact = oracle.apply(&g).unwrap().normalized().unwrap();
            let closed = squeeze_closed_form(&g, &p, PhaseCoefficient::Disentangled).unwrap();
            assert!(closed.state.phase_aligned_distance(&exact).unwrap() < 1e-6, "f={f} g={gg}");
            assert!(oracle.unitarity_defect(8) < 1e-8);
        }
    }

    #[test]
    fn pure_quadratic_phase_keeps_modulus() {
        let c = natural();
        let grid = Grid1D::symmetric(11.0, 256).unwrap();
        let g = ground(&grid);
        let p = SqueezeParams::from_fg(0.0, 0.4, 0.5f64.sqrt(), c).unwrap();
        let out = squeeze_matrix_oracle(&p, &grid, c).unwrap().apply(&g).unwrap();
        let diff = out.psi().iter().zip(g.psi()).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-8);
    }

    #[test]
    fn commutator_on_smooth_states() {
        let c = natural();
        let grid = Grid1D::symmetric(11.0, 256).unwrap();
        let states: Vec<WaveFunction> = [0usize, 1, 2]
            .iter()
            .map(|&k| {
                WaveFunction::from_fn(grid.clone(), c, |x| {
                    let h = [1.0, 2.0 * x, 4.0 * x * x - 2.0][k];
                    Complex64::new(h * (-x * x / 2.0).exp(), 0.0)
                })
                .unwrap()
                .normalized()
                .unwrap()
            })
            .collect();
        for d in commutator_defect(&grid, c, &states, 8).unwrap() {
            assert!(d < 1e-6, "{d}");
        }
        assert!(commutator_matrix_defect(&grid, c, 8).unwrap() > 1e-6);
    }

    #[test]
    fn squeezed_state_reduces_to_coherent_state() {
        let grid = Grid1D::default();
        let c = natural();
        let g = ground(&grid);
        let profile = StateProfile::gaussian(c);
        let same = squeezed_state(&g, &TrajectoryState::at_rest(0.5f64.sqrt()), &profile, PhaseCoefficient::Factorized).unwrap();
        assert!(same.overlap > 1.0 - 1e-12);
        let traj = TrajectoryState::new(0.0, 1.0, 0.5, 0.5f64.sqrt(), 0.0, 0.0).unwrap();
        let coh = squeezed_state(&g, &traj, &profile, PhaseCoefficient::Factorized).unwrap();
        assert!(coh.overlap >= 1.0 - 1e-9);
        let traj = TrajectoryState::new(0.0, 0.4, -0.2, 0.9, 0.35, 0.3).unwrap();
        let full = squeezed_state(&g, &traj, &profile, PhaseCoefficient::Factorized).unwrap();
        assert!(full.density_max_diff < 1e-6);
        assert!((full.curvature_assembled - full.curvature_target).abs() < 1e-6);
    }

    #[test]
    fn phase_fit_recovers_coefficients() {
        let grid = Grid1D::default();
        let wf = WaveFunction::from_fn(grid, natural(), |x| {
            let y = x - 0.5;
            Complex64::from_polar((-y * y).exp(), 0.3 + 0.2 * y - 0.45 * y * y)
        })
        .unwrap()
        .normalized()
        .unwrap();
        let fit = fit_quadratic_phase(&wf, 0.5, 1e-8).unwrap();
        assert!((fit[1] - 0.2).abs() < 1e-9 && (fit[2] + 0.45).abs() < 1e-9);
    }
}
