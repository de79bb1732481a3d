//! Euler-Maruyama sampling of the Nelson diffusion carried by a coherent
//! trajectory, and the statistics that tie the paths back to the state.

use ndarray::Array2;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::dynamics::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::profile::StateProfile;
use crate::state::TrajectoryState;

/// Paths reaching more than this many dispersions from the centre are
/// excluded from the statistics.
pub const DEFAULT_XI_MAX: f64 = 8.0;
/// Largest tolerated fraction of excluded paths.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;
/// Bins with fewer samples are skipped by the drift estimators.
pub const MIN_BIN_COUNT: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub t_span: (f64, f64),
    /// Positions are stored every `output_stride` steps.
    pub output_stride: usize,
    pub xi_max: f64,
}

impl EnsembleConfig {
    pub fn new(n_paths: usize, dt: f64, seed: u64, t_span: (f64, f64)) -> Result<Self> {
        let cfg = Self { n_paths, dt, seed, t_span, output_stride: 100, xi_max: DEFAULT_XI_MAX };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 100 {
            return Err(Error::InvalidInput(format!("ensemble needs at least 100 paths, got {}", self.n_paths)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("sampler time step must be positive, got {}", self.dt)));
        }
        let span = self.t_span.1 - self.t_span.0;
        if !(span > 0.0 && span.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid ensemble time span {:?}", self.t_span)));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidInput("output stride must be at least 1".into()));
        }
        if !(self.xi_max > 0.0) {
            return Err(Error::InvalidInput("exclusion radius must be positive".into()));
        }
        Ok(())
    }
}

/// Stored path positions. Rows are output times, columns are paths;
/// `lagged` holds the positions one step before each output time (NaN at
/// the initial time).
#[derive(Clone, Debug)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    pub positions: Array2<f64>,
    pub lagged: Array2<f64>,
    /// Output-row index at which each path was excluded, if it was.
    pub excluded_at: Vec<Option<usize>>,
    pub step: f64,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.positions.ncols()
    }

    /// True for paths still counted at output row `row`.
    pub fn active(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.excluded_at.iter().enumerate().filter(move |(_, e)| e.is_none_or(|k| k > row)).map(|(i, _)| i)
    }

    pub fn excluded_fraction(&self, row: usize) -> f64 {
        self.excluded_at.iter().filter(|e| e.is_some_and(|k| k <= row)).count() as f64 / self.n_paths() as f64
    }
}

/// Forward drift v₊ = ⟨v⟩ + ξΔq̇ + G(ξ)/Δq.
pub fn forward_drift(profile: &StateProfile, s: &TrajectoryState, x: f64) -> f64 {
    let xi = (x - s.q_mean) / s.dq;
    s.v_mean + xi * s.dq_dot + profile.g(xi) / s.dq
}

/// Backward drift v₋ = ⟨v⟩ + ξΔq̇ − G(ξ)/Δq.
pub fn backward_drift(profile: &StateProfile, s: &TrajectoryState, x: f64) -> f64 {
    let xi = (x - s.q_mean) / s.dq;
    s.v_mean + xi * s.dq_dot - profile.g(xi) / s.dq
}

fn standard_normal(rng: &mut ChaCha8Rng, normal: &Normal) -> f64 {
    // open-interval uniform from the top 53 bits
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    normal.inverse_cdf(u)
}

/// Euler-Maruyama paths of dq = v₊ dt + √(ħ dt/m) N(0, 1) along the
/// record, started from the profile density. Path `i` uses stream `i` of
/// a ChaCha8 generator seeded with `cfg.seed`, so the result does not
/// depend on how paths are split across threads.
pub fn sample_forward(profile: &StateProfile, record: &TrajectoryRecord, cfg: &EnsembleConfig) -> Result<PathEnsemble> {
    cfg.validate()?;
    let (t0, t1) = cfg.t_span;
    let slack = 1e-9 * t1.abs().max(1.0);
    if t0 < record.start() - slack || t1 > record.end() + slack {
        return Err(Error::OutOfTimeSpan { t: if t0 < record.start() { t0 } else { t1 }, start: record.start(), end: record.end() });
    }
    let steps = (((t1 - t0) / cfg.dt).round() as usize).max(1);
    let h = (t1 - t0) / steps as f64;
    let c = profile.constants();
    let noise = (c.hbar * h / c.mass).sqrt();
    let states: Vec<TrajectoryState> = (0..=steps)
        .map(|k| record.state_at((t0 + k as f64 * h).min(record.end())).map(|p| p.state))
        .collect::<Result<_>>()?;
    let output_steps: Vec<usize> = (0..=steps).filter(|k| k % cfg.output_stride == 0 || *k == steps).collect();
    let n_out = output_steps.len();
    let normal = Normal::standard();

    let paths: Vec<(Vec<f64>, Vec<f64>, Option<usize>)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(path as u64);
            let mut pos = Vec::with_capacity(n_out);
            let mut lag = Vec::with_capacity(n_out);
            let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
            let s0 = &states[0];
            let mut q = s0.q_mean + s0.dq * profile.quantile(u);
            let mut prev = f64::NAN;
            let mut excluded = None;
            let mut next_out = 0;
            for (k, s) in states.iter().enumerate() {
                if k > 0 {
                    let p = &states[k - 1];
                    prev = q;
                    q += forward_drift(profile, p, q) * h + noise * standard_normal(&mut rng, &normal);
                }
                if excluded.is_none() && ((q - s.q_mean) / s.dq).abs() > cfg.xi_max {
                    excluded = Some(next_out.min(n_out - 1));
                }
                if output_steps[next_out] == k {
                    pos.push(q);
                    lag.push(prev);
                    next_out += 1;
                }
                if excluded.is_some() {
                    // keep shapes rectangular; the path no longer counts
                    while next_out < n_out {
                        pos.push(f64::NAN);
                        lag.push(f64::NAN);
                        next_out += 1;
                    }
                    break;
                }
            }
            (pos, lag, excluded)
        })
        .collect();

    let mut positions = Array2::<f64>::zeros((n_out, cfg.n_paths));
    let mut lagged = Array2::<f64>::zeros((n_out, cfg.n_paths));
    let mut excluded_at = Vec::with_capacity(cfg.n_paths);
    for (j, (pos, lag, ex)) in paths.into_iter().enumerate() {
        for r in 0..n_out {
            positions[[r, j]] = pos[r];
            lagged[[r, j]] = lag[r];
        }
        excluded_at.push(ex);
    }
    let ensemble = PathEnsemble {
        times: output_steps.iter().map(|&k| t0 + k as f64 * h).collect(),
        positions,
        lagged,
        excluded_at,
        step: h,
    };
    let fraction = ensemble.excluded_fraction(n_out - 1);
    if fraction > MAX_EXCLUDED_FRACTION {
        return Err(Error::ExcessiveExclusion { fraction });
    }
    Ok(ensemble)
}

/// One row of the ensemble summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleRow {
    pub t: f64,
    pub empirical_mean: f64,
    pub empirical_std: f64,
    pub model_mean: f64,
    pub model_std: f64,
    pub excluded_fraction: f64,
    /// |mean − model| in units of Δq/√n.
    pub mean_z: f64,
    /// |std − model| in units of Δq/√(2n), corrected for the profile's kurtosis.
    pub std_z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleSummary {
    pub rows: Vec<EnsembleRow>,
}

impl EnsembleSummary {
    pub fn max_mean_z(&self) -> f64 {
        self.rows.iter().map(|r| r.mean_z).fold(0.0, f64::max)
    }

    pub fn max_std_z(&self) -> f64 {
        self.rows.iter().map(|r| r.std_z).fold(0.0, f64::max)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64, usize) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, var.sqrt(), n)
}

/// Empirical mean and spread at every output time against the record.
pub fn summarize(ensemble: &PathEnsemble, profile: &StateProfile, record: &TrajectoryRecord) -> Result<EnsembleSummary> {
    // the standard deviation of a sample std is σ√((κ − 1)/4n) for kurtosis κ
    let kurtosis = profile.moment(4);
    let std_scale = ((kurtosis - 1.0) / 2.0).sqrt();
    let mut rows = Vec::with_capacity(ensemble.times.len());
    for (r, &t) in ensemble.times.iter().enumerate() {
        let s = record.state_at(t)?.state;
        let values: Vec<f64> = ensemble.active(r).map(|j| ensemble.positions[[r, j]]).collect();
        let (mean, std, n) = mean_std(&values);
        let sqrt_n = (n as f64).sqrt();
        rows.push(EnsembleRow {
            t,
            empirical_mean: mean,
            empirical_std: std,
            model_mean: s.q_mean,
            model_std: s.dq,
            excluded_fraction: ensemble.excluded_fraction(r),
            mean_z: (mean - s.q_mean).abs() / (s.dq / sqrt_n),
            std_z: (std - s.dq).abs() / (std_scale * s.dq / (2.0 * n as f64).sqrt()),
        });
    }
    Ok(EnsembleSummary { rows })
}

/// χ² goodness of fit of the final positions against ρ̃(ξ)/Δq on
/// `bins` equiprobable bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityFit {
    pub t: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

pub fn density_fit(ensemble: &PathEnsemble, profile: &StateProfile, record: &TrajectoryRecord, row: usize, bins: usize) -> Result<DensityFit> {
    if bins < 2 {
        return Err(Error::InvalidInput("density fit needs at least two bins".into()));
    }
    let t = ensemble.times[row];
    let s = record.state_at(t)?.state;
    let edges: Vec<f64> = (1..bins).map(|k| profile.quantile(k as f64 / bins as f64)).collect();
    let mut counts = vec![0usize; bins];
    let mut n = 0usize;
    for j in ensemble.active(row) {
        let xi = (ensemble.positions[[row, j]] - s.q_mean) / s.dq;
        counts[edges.partition_point(|e| *e <= xi)] += 1;
        n += 1;
    }
    let expected = n as f64 / bins as f64;
    let chi_square = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum::<f64>();
    let dof = bins - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(DensityFit { t, chi_square, degrees_of_freedom: dof, p_value: dist.sf(chi_square) })
}

/// Binned comparison of the conditional backward increment with a drift.
#[derive(Clone, Debug, Serialize)]
pub struct BackwardReport {
    /// Bin centres in ξ.
    pub xi: Vec<f64>,
    pub counts: Vec<usize>,
    /// Mean of (q(t) − q(t − dt))/dt − v₋(q(t)) per bin.
    pub mean_residual: Vec<f64>,
    /// Standard error of the mean per bin.
    pub band: Vec<f64>,
    /// Largest |mean_residual|/band over bins with enough samples.
    pub max_band_deviation: f64,
    /// The same statistic against the forward drift, which should fail
    /// whenever the osmotic velocity is not negligible.
    pub max_band_deviation_forward: f64,
    pub skipped_bins: usize,
}

/// Estimates E[q(t) − q(t − dt) | q(t)]/dt, pooled over output times in
/// ξ-bins spanning ±`xi_range`, and compares it with v₋ = v − u.
pub fn backward_consistency(
    ensemble: &PathEnsemble,
    profile: &StateProfile,
    record: &TrajectoryRecord,
    bins: usize,
    xi_range: f64,
) -> Result<BackwardReport> {
    let width = 2.0 * xi_range / bins as f64;
    let mut acc = vec![(0usize, 0.0, 0.0, 0.0); bins];
    for r in 1..ensemble.times.len() {
        let s = record.state_at(ensemble.times[r])?.state;
        for j in ensemble.active(r) {
            let q = ensemble.positions[[r, j]];
            let lag = ensemble.lagged[[r, j]];
            let xi = (q - s.q_mean) / s.dq;
            if xi.abs() >= xi_range {
                continue;
            }
            let b = (((xi + xi_range) / width) as usize).min(bins - 1);
            let inc = (q - lag) / ensemble.step;
            let res = inc - backward_drift(profile, &s, q);
            let res_fwd = inc - forward_drift(profile, &s, q);
            let a = &mut acc[b];
            a.0 += 1;
            a.1 += res;
            a.2 += res * res;
            a.3 += res_fwd;
        }
    }
    let mut report = BackwardReport {
        xi: Vec::new(),
        counts: Vec::new(),
        mean_residual: Vec::new(),
        band: Vec::new(),
        max_band_deviation: 0.0,
        max_band_deviation_forward: 0.0,
        skipped_bins: 0,
    };
    for (b, &(n, s1, s2, f1)) in acc.iter().enumerate() {
        if n < MIN_BIN_COUNT {
            report.skipped_bins += 1;
            continue;
        }
        let nf = n as f64;
        let mean = s1 / nf;
        let var = (s2 / nf - mean * mean) * nf / (nf - 1.0);
        let band = (var / nf).sqrt();
        report.xi.push(-xi_range + (b as f64 + 0.5) * width);
        report.counts.push(n);
        report.mean_residual.push(mean);
        report.band.push(band);
        report.max_band_deviation = report.max_band_deviation.max(mean.abs() / band);
        report.max_band_deviation_forward = report.max_band_deviation_forward.max((f1 / nf).abs() / band);
    }
    Ok(report)
}

/// Mean of (q(t) − q(t − dt) − v₊(q(t − dt)) dt)²/dt over all paths and
/// output times; estimates the Wiener coefficient ħ/m.
pub fn diffusion_estimate(ensemble: &PathEnsemble, profile: &StateProfile, record: &TrajectoryRecord) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in 1..ensemble.times.len() {
        let s = record.state_at(ensemble.times[r] - ensemble.step)?.state;
        for j in ensemble.active(r) {
            let lag = ensemble.lagged[[r, j]];
            let d = ensemble.positions[[r, j]] - lag - forward_drift(profile, &s, lag) * ensemble.step;
            sum += d * d / ensemble.step;
            n += 1;
        }
    }
    Ok(sum / n as f64)
}

/// m·Δq·Δu by the exact route (m√K) and from the paths at one output row,
/// with the CLT band of the empirical value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OsmoticUncertainty {
    pub exact: f64,
    pub empirical: f64,
    pub band: f64,
    pub bound: f64,
}

impl OsmoticUncertainty {
    pub fn within_band(&self) -> bool {
        (self.exact - self.empirical).abs() <= self.band
    }
}

pub fn osmotic_uncertainty(ensemble: &PathEnsemble, profile: &StateProfile, record: &TrajectoryRecord, row: usize) -> Result<OsmoticUncertainty> {
    let c = profile.constants();
    let s = record.state_at(ensemble.times[row])?.state;
    let qs: Vec<f64> = ensemble.active(row).map(|j| ensemble.positions[[row, j]]).collect();
    let us: Vec<f64> = qs.iter().map(|q| profile.g((q - s.q_mean) / s.dq) / s.dq).collect();
    let (_, sq, n) = mean_std(&qs);
    let (_, su, _) = mean_std(&us);
    let kurt = |v: &[f64]| {
        let (m, sd, _) = mean_std(v);
        v.iter().map(|x| ((x - m) / sd).powi(4)).sum::<f64>() / v.len() as f64
    };
    let rel = |k: f64| ((k - 1.0).max(0.0) / (4.0 * n as f64)).sqrt();
    let exact = c.mass * profile.osmotic_moment().sqrt();
    Ok(OsmoticUncertainty {
        exact,
        empirical: c.mass * sq * su,
        band: 4.0 * exact * (rel(kurt(&qs)) + rel(kurt(&us))),
        bound: 0.5 * c.hbar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, DispersionLaw};
    use crate::grid::PhysConstants;
    use crate::potential::{Harmonic, Polynomial};

    fn natural() -> PhysConstants {
        PhysConstants::natural()
    }

    fn ground_record(t_end: f64) -> (StateProfile, TrajectoryRecord) {
        let c = natural();
        let p = StateProfile::gaussian(c);
        let rec = integrate(&TrajectoryState::at_rest(0.5f64.sqrt()), &p, &Harmonic::new(c, 1.0), DispersionLaw::Projected, t_end, 1e-3).unwrap();
        (p, rec)
    }

    #[test]
    fn config_is_validated() {
        assert!(EnsembleConfig::new(99, 1e-3, 1, (0.0, 1.0)).is_err());
        assert!(EnsembleConfig::new(100, 0.0, 1, (0.0, 1.0)).is_err());
        assert!(EnsembleConfig::new(100, 1e-3, 1, (1.0, 1.0)).is_err());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let (p, rec) = ground_record(0.5);
        let cfg = EnsembleConfig::new(300, 1e-3, 7, (0.0, 0.5)).unwrap();
        let a = sample_forward(&p, &rec, &cfg).unwrap();
        let b = sample_forward(&p, &rec, &cfg).unwrap();
        assert_eq!(a.positions, b.positions);
        let c = sample_forward(&p, &rec, &EnsembleConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn stationary_ensemble_statistics() {
        let (p, rec) = ground_record(1.0);
        let cfg = EnsembleConfig::new(20_000, 1e-3, 11, (0.0, 1.0)).unwrap();
        let ens = sample_forward(&p, &rec, &cfg).unwrap();
        let summary = summarize(&ens, &p, &rec).unwrap();
        assert!(summary.max_mean_z() < 4.0 && summary.max_std_z() < 4.0);
        let fit = density_fit(&ens, &p, &rec, ens.times.len() - 1, 50).unwrap();
        assert!(fit.p_value > 1e-3, "{fit:?}");
        let back = backward_consistency(&ens, &p, &rec, 16, 3.0).unwrap();
        assert!(back.max_band_deviation < 5.0, "{back:?}");
        assert!(back.max_band_deviation_forward > 5.0);
        let d = diffusion_estimate(&ens, &p, &rec).unwrap();
        assert!((d - 1.0).abs() < 0.02);
        let ou = osmotic_uncertainty(&ens, &p, &rec, ens.times.len() - 1).unwrap();
        assert!((ou.exact - 0.5).abs() < 1e-12 && ou.within_band(), "{ou:?}");
    }

    #[test]
    fn free_spreading_backward_drift() {
        let c = natural();
        let p = StateProfile::gaussian(c);
        let rec = integrate(&TrajectoryState::at_rest(0.5f64.sqrt()), &p, &Polynomial::free(), DispersionLaw::Projected, 1.0, 1e-3).unwrap();
        let ens = sample_forward(&p, &rec, &EnsembleConfig::new(20_000, 1e-3, 3, (0.0, 1.0)).unwrap()).unwrap();
        let back = backward_consistency(&ens, &p, &rec, 16, 3.0).unwrap();
        assert!(back.max_band_deviation < 5.0, "{back:?}");
        assert!(summarize(&ens, &p, &rec).unwrap().max_std_z() < 4.0);
    }

    #[test]
    fn sech2_osmotic_product_exceeds_bound() {
        let c = natural();
        let p = StateProfile::sech2(c);
        let rec = integrate(&TrajectoryState::at_rest(1.0), &p, &Polynomial::free(), DispersionLaw::Projected, 0.2, 1e-3).unwrap();
        let ens = sample_forward(&p, &rec, &EnsembleConfig::new(20_000, 1e-3, 5, (0.0, 0.2)).unwrap()).unwrap();
        let ou = osmotic_uncertainty(&ens, &p, &rec, 0).unwrap();
        assert!(ou.exact > ou.bound + 1e-3 && ou.within_band(), "{ou:?}");
    }

    #[test]
    fn exclusion_is_reported() {
        let (p, rec) = ground_record(0.5);
        let cfg = EnsembleConfig { xi_max: 1.0, ..EnsembleConfig::new(500, 1e-3, 1, (0.0, 0.5)).unwrap() };
        assert!(matches!(sample_forward(&p, &rec, &cfg), Err(Error::ExcessiveExclusion { .. })));
    }
}
