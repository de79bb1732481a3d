//! Randomized checks of the invariants that hold for whole families of
//! states, operators and trajectories.

use num_complex::Complex64;
use proptest::prelude::*;
use squeezelab_core::dynamics::integrate;
use squeezelab_core::hydro::{hjm_residual, phase_rate, uncertainty_chain};
use squeezelab_core::operators::{displace, squeeze_closed_form, PhaseCoefficient, SqueezeParams};
use squeezelab_core::potential::Harmonic;
use squeezelab_core::sampler::{sample_forward, EnsembleConfig};
use squeezelab_core::*;

fn natural() -> PhysConstants {
    PhysConstants::natural()
}

/// Integration tests have no source root for regression files.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn profile(sech: bool) -> StateProfile {
    if sech {
        StateProfile::sech2(natural())
    } else {
        StateProfile::gaussian(natural())
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn chain_and_momentum_decomposition(
        sech in any::<bool>(),
        q in -3.0..3.0f64,
        v in -1.5..1.5f64,
        dq in 0.5..1.2f64,
        dq_dot in -0.6..0.6f64,
    ) {
        let p = profile(sech);
        let grid = Grid1D::symmetric(40.0, 2048).unwrap();
        let s = TrajectoryState::new(0.0, q, v, dq, dq_dot, 0.3).unwrap();
        let wf = assemble_state(&p, &s, &grid).unwrap();
        let chain = uncertainty_chain(&wf, 1e-14).unwrap();
        prop_assert!(chain.holds(1e-8), "{chain:?}");
        let rel = (chain.momentum_from_velocities - chain.momentum_spread_sq).abs() / chain.momentum_spread_sq;
        prop_assert!(rel < 1e-6, "momentum decomposition off by {rel:e}");
        let h = decompose(&wf, 1e-14).unwrap();
        prop_assert!(h.mean_osmotic().abs() < 1e-9);
    }

    #[test]
    fn squeeze_sets_the_requested_dispersion(f in -1.0..1.0f64, g in -0.3..0.3f64) {
        let c = natural();
        let dq0 = 0.5f64.sqrt();
        let grid = Grid1D::symmetric(11.0 * (-2.0 * f).exp().max(1.0), 512).unwrap();
        let psi0 = assemble_state(&profile(false), &TrajectoryState::at_rest(dq0), &grid).unwrap();
        let params = SqueezeParams::from_fg(f, g, dq0, c).unwrap();
        for coefficient in [PhaseCoefficient::Disentangled, PhaseCoefficient::Factorized] {
            let out = squeeze_closed_form(&psi0, &params, coefficient).unwrap();
            let o = observables(&out.state).unwrap();
            prop_assert!((o.dq - dq0 * (-2.0 * f).exp()).abs() < 1e-6);
            prop_assert!((out.state.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn displacement_is_unitary_and_composes(
        a in -3.0..3.0f64, b in -3.0..3.0f64, pa in -2.0..2.0f64, pb in -2.0..2.0f64,
    ) {
        let grid = Grid1D::symmetric(20.0, 1024).unwrap();
        let psi = WaveFunction::from_fn(grid, natural(), |x| {
            Complex64::from_polar((-(x * x) / 2.0).exp() * std::f64::consts::PI.powf(-0.25), 0.2 * x)
        }).unwrap();
        let one = displace(&psi, a, pa, 0.0).unwrap();
        prop_assert!((one.norm_sqr() - 1.0).abs() < 1e-10);
        let two = displace(&one, b, pb, 0.0).unwrap();
        let direct = displace(&psi, a + b, pa + pb, 0.0).unwrap();
        // equal up to a global phase
        prop_assert!(two.overlap(&direct).unwrap() > 1.0 - 1e-10);
        let shift = observables(&two).unwrap().q_mean - observables(&psi).unwrap().q_mean;
        prop_assert!((shift - (a + b)).abs() < 1e-9);
    }

    #[test]
    fn s0_closure_holds_at_the_centre(q0 in -2.0..2.0f64, v0 in -1.0..1.0f64, dq0 in 0.55..0.9f64) {
        let c = natural();
        let p = profile(false);
        let well = Harmonic::new(c, 1.0);
        let init = TrajectoryState::new(0.0, q0, v0, dq0, 0.0, 0.0).unwrap();
        let record = integrate(&init, &p, &well, DispersionLaw::Projected, 2.0, 1e-3).unwrap();
        let grid = Grid1D::symmetric(20.0, 1024).unwrap();
        let (t, delta) = (1.2, 1e-4);
        let at = |t: f64| assemble_state(&p, &record.state_at(t).unwrap().state, &grid).unwrap();
        let mid = at(t);
        let h = decompose(&mid, 1e-10).unwrap();
        let rate = phase_rate(&at(t - delta), &at(t + delta), delta);
        let r = hjm_residual(&h, &rate, &well, t).unwrap();
        let j = grid.nearest_index(record.state_at(t).unwrap().state.q_mean);
        prop_assert!(r[j].abs() < 1e-6, "residual {:e} at the centre", r[j]);
    }
}

proptest! {
    #![proptest_config(config(4))]

    #[test]
    fn seeded_ensembles_are_bit_identical(seed in any::<u64>()) {
        let p = profile(false);
        let well = Harmonic::new(natural(), 1.0);
        let init = TrajectoryState::new(0.0, 1.0, 0.0, 0.5f64.sqrt(), 0.0, 0.0).unwrap();
        let record = integrate(&init, &p, &well, DispersionLaw::Projected, 0.5, 1e-3).unwrap();
        let cfg = EnsembleConfig::new(500, 1e-3, seed, (0.0, 0.5)).unwrap();
        let a = sample_forward(&p, &record, &cfg).unwrap();
        let b = sample_forward(&p, &record, &cfg).unwrap();
        prop_assert!(a.positions.iter().zip(b.positions.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
