//! Shape profiles ρ̃(ξ) of generalized coherent-state families.
//!
//! A profile is stored through L(ξ) = ln ρ̃(ξ) and its derivatives. The
//! osmotic shape function is G(ξ) = (ħ/2m) L′(ξ), so that the osmotic
//! velocity of a packet with dispersion Δq is u = G(ξ)/Δq. Every profile is
//! standardized to unit mass, zero mean and unit variance, which makes Δq the
//! literal root-mean-square width of the packet.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::grid::{PhysConstants, WaveFunction};
use crate::interp::{locate, natural_spline_derivatives, quintic_hermite};

/// Points used by profile quadratures (odd, so that every other node forms
/// the half-resolution rule used for convergence checks).
pub const PROFILE_QUADRATURE_POINTS: usize = 4097;
/// Largest change allowed when a profile quadrature is halved in resolution.
pub const QUADRATURE_CONVERGENCE_TOL: f64 = 1e-6;
/// Drop (in natural-log units) below the peak where a profile's support ends.
const SUPPORT_LOG_DROP: f64 = 40.0;

#[derive(Clone, Debug)]
struct TableShape {
    xi: Vec<f64>,
    /// (L, L′, L″) at each node.
    nodes: Vec<[f64; 3]>,
}

impl TableShape {
    fn new(xi: Vec<f64>, nodes: Vec<[f64; 3]>) -> Result<Self> {
        if xi.len() < 4 || xi.len() != nodes.len() {
            return Err(Error::InvalidProfile("a table needs at least four nodes".into()));
        }
        if xi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidProfile("table abscissae must be strictly increasing".into()));
        }
        if nodes.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("table contains non-finite values".into()));
        }
        let first = nodes[0];
        let last = nodes[nodes.len() - 1];
        if !(first[1] > 0.0 && last[1] < 0.0) {
            return Err(Error::InvalidProfile(
                "density must decay at both ends of the table".into(),
            ));
        }
        Ok(Self { xi, nodes })
    }

    /// L and its first three derivatives. Outside the table G continues
    /// linearly from its last slope (L quadratic, never convex).
    fn eval(&self, x: f64) -> [f64; 4] {
        let n = self.xi.len();
        let extend = |node: [f64; 3], d: f64| {
            let curv = node[2].min(0.0);
            [node[0] + node[1] * d + 0.5 * curv * d * d, node[1] + curv * d, curv, 0.0]
        };
        if x < self.xi[0] {
            return extend(self.nodes[0], x - self.xi[0]);
        }
        if x > self.xi[n - 1] {
            return extend(self.nodes[n - 1], x - self.xi[n - 1]);
        }
        let i = locate(&self.xi, x);
        quintic_hermite(self.nodes[i], self.nodes[i + 1], self.xi[i + 1] - self.xi[i], x - self.xi[i])
    }

    /// Affine change of variable ξ → (ξ − shift)/scale plus a log offset.
    fn transformed(&self, shift: f64, scale: f64, log_offset: f64) -> Self {
        Self {
            xi: self.xi.iter().map(|x| (x - shift) / scale).collect(),
            nodes: self
                .nodes
                .iter()
                .map(|n| [n[0] + log_offset, n[1] * scale, n[2] * scale * scale])
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Gaussian,
    /// ρ̃ = (a/2) sech²(aξ) with a = π/√12 (unit variance).
    Sech2 { a: f64 },
    Table(TableShape),
}

impl Shape {
    fn log_derivatives(&self, x: f64) -> [f64; 4] {
        match self {
            Shape::Gaussian => [-0.5 * x * x - 0.5 * (2.0 * PI).ln(), -x, -1.0, 0.0],
            Shape::Sech2 { a } => {
                let y = a * x;
                let ay = y.abs();
                let log_cosh = ay + (-2.0 * ay).exp().ln_1p() - std::f64::consts::LN_2;
                let th = y.tanh();
                let sech2 = 1.0 - th * th;
                [
                    (a / 2.0).ln() - 2.0 * log_cosh,
                    -2.0 * a * th,
                    -2.0 * a * a * sech2,
                    4.0 * a * a * a * sech2 * th,
                ]
            }
            Shape::Table(t) => t.eval(x),
        }
    }
}

/// Cumulative distribution sampled on the quadrature grid (tabulated shapes).
#[derive(Clone, Debug)]
struct CdfTable {
    xi: Vec<f64>,
    cdf: Vec<f64>,
}

impl CdfTable {
    fn quantile(&self, p: f64) -> f64 {
        let i = match self.cdf.binary_search_by(|v| v.partial_cmp(&p).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => return self.xi[i],
            Err(i) => i.clamp(1, self.cdf.len() - 1),
        };
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let w = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.5 };
        self.xi[i - 1] + w * (self.xi[i] - self.xi[i - 1])
    }
}

/// Summary numbers of a profile, serializable for reports.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileSummary {
    pub osmotic_moment: f64,
    pub dispersion_force_moment: f64,
    pub unweighted_osmotic_moment: f64,
    pub g0: f64,
    pub g0_prime: f64,
    pub g0_second: f64,
}

/// Shape data of one generalized coherent-state family.
#[derive(Clone, Debug)]
pub struct StateProfile {
    name: String,
    shape: Shape,
    constants: PhysConstants,
    support: (f64, f64),
    moments: [f64; 9],
    k: f64,
    c_g: f64,
    k_unweighted: f64,
    g0: [f64; 3],
    source_dispersion: Option<f64>,
    cdf: Option<CdfTable>,
    nodes: Vec<f64>,
    rho_nodes: Vec<f64>,
    step: f64,
}

impl StateProfile {
    /// Gaussian (harmonic ground-state) profile: G(ξ) = −(ħ/2m) ξ.
    pub fn gaussian(constants: PhysConstants) -> Self {
        let mut p = Self::finish("gaussian".into(), Shape::Gaussian, constants, (-12.0, 12.0), None)
            .expect("gaussian profile is valid");
        // exact values; the quadrature agrees to rounding
        p.moments = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0];
        p.k = constants.diffusion().powi(2);
        p.c_g = constants.mass * p.k;
        p
    }

    /// ρ̃ ∝ sech²(aξ), the ground-state density of a Pöschl-Teller well.
    pub fn sech2(constants: PhysConstants) -> Self {
        let a = PI / 12f64.sqrt();
        let reach = (SUPPORT_LOG_DROP + 2.0) / (2.0 * a);
        Self::finish("sech2".into(), Shape::Sech2 { a }, constants, (-reach, reach), None)
            .expect("sech2 profile is valid")
    }

    /// Built-in profiles by name: "gaussian" or "sech2".
    pub fn by_name(name: &str, constants: PhysConstants) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::gaussian(constants)),
            "sech2" => Ok(Self::sech2(constants)),
            other => Err(Error::InvalidProfile(format!("unknown built-in profile '{other}'"))),
        }
    }

    /// Profile from tabulated (ξ, ρ̃) pairs. ln ρ̃ is cubic-spline
    /// interpolated; the table is re-centred and rescaled to unit variance.
    pub fn from_table(name: &str, xi: &[f64], rho: &[f64], constants: PhysConstants) -> Result<Self> {
        if xi.len() != rho.len() {
            return Err(Error::InvalidProfile("ξ and ρ̃ columns differ in length".into()));
        }
        if rho.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidProfile("tabulated density must be strictly positive".into()));
        }
        let logs: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
        if xi.len() < 4 {
            return Err(Error::InvalidProfile("a table needs at least four nodes".into()));
        }
        let (d1, d2) = natural_spline_derivatives(xi, &logs);
        let nodes = logs.iter().zip(d1.iter().zip(&d2)).map(|(l, (a, b))| [*l, *a, *b]).collect();
        let table = TableShape::new(xi.to_vec(), nodes)?;
        Self::from_table_shape(name.into(), table, constants, None)
    }

    /// Reads a two-column CSV of (ξ, ρ̃) pairs; `#` lines and a non-numeric
    /// header row are skipped.
    pub fn from_csv(path: impl AsRef<Path>, constants: PhysConstants) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut xi = Vec::new();
        let mut rho = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::InvalidProfile(format!("row {row} has fewer than two columns")));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    xi.push(a);
                    rho.push(b);
                }
                _ if row == 0 => continue,
                _ => return Err(Error::InvalidProfile(format!("row {row} is not numeric"))),
            }
        }
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
        Self::from_table(name, &xi, &rho, constants)
    }

    /// Builds the profile of a real, nodeless ground state ψ₀: measures its
    /// dispersion Δq₀ and sets ρ̃(ξ) = Δq₀ |ψ₀(⟨q⟩ + Δq₀ ξ)|².
    pub fn from_ground_state(psi0: &WaveFunction) -> Result<Self> {
        let psi = psi0.psi();
        let (peak_idx, peak) = psi
            .iter()
            .enumerate()
            .map(|(i, z)| (i, z.norm()))
            .fold((0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if !(peak > 0.0) {
            return Err(Error::InvalidProfile("ground state vanishes identically".into()));
        }
        let rot = psi[peak_idx].conj() / peak;
        let real: Vec<f64> = psi.iter().map(|z| (z * rot).re).collect();
        let imag_max = psi.iter().map(|z| (z * rot).im.abs()).fold(0.0, f64::max);
        if imag_max > 1e-8 * peak {
            return Err(Error::InvalidProfile(format!(
                "ground state carries a non-trivial phase (|Im ψ| up to {:.2e} of peak)",
                imag_max / peak
            )));
        }
        if real.iter().any(|&v| v < -1e-10 * peak) {
            return Err(Error::InvalidProfile("ground state has nodes".into()));
        }

        let grid = psi0.grid();
        let dx = grid.dx();
        let xs = grid.points();
        let norm: f64 = real.iter().map(|v| v * v).sum::<f64>() * dx;
        let mean = xs.iter().zip(&real).map(|(x, v)| x * v * v).sum::<f64>() * dx / norm;
        let var = xs.iter().zip(&real).map(|(x, v)| (x - mean).powi(2) * v * v).sum::<f64>() * dx / norm;
        let dq0 = var.sqrt();

        let d1 = grid.derivative(&real, 1)?;
        let d2 = grid.derivative(&real, 2)?;
        let threshold = 1e-7 * peak;
        let valid: Vec<usize> = (0..real.len()).filter(|&j| real[j] > threshold).collect();
        if valid.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidProfile("ground state has interior near-nodes".into()));
        }
        let scale_norm = norm.sqrt();
        let mut xi = Vec::with_capacity(valid.len());
        let mut nodes = Vec::with_capacity(valid.len());
        for &j in &valid {
            let r1 = d1[j] / real[j];
            let r2 = d2[j] / real[j];
            xi.push((xs[j] - mean) / dq0);
            nodes.push([
                (dq0 * (real[j] / scale_norm).powi(2)).ln(),
                2.0 * dq0 * r1,
                2.0 * dq0 * dq0 * (r2 - r1 * r1),
            ]);
        }
        let table = TableShape::new(xi, nodes)?;
        Self::from_table_shape("ground-state".into(), table, psi0.constants(), Some(dq0))
    }

    fn from_table_shape(
        name: String,
        table: TableShape,
        constants: PhysConstants,
        source_dispersion: Option<f64>,
    ) -> Result<Self> {
        // standardize twice: the second pass removes the quadrature error of
        // the first on the transformed support
        let mut table = table;
        for _ in 0..2 {
            let support = table_support(&table);
            let shape = Shape::Table(table.clone());
            let m = raw_moments(&shape, support, PROFILE_QUADRATURE_POINTS);
            if !(m[0] > 0.0) {
                return Err(Error::InvalidProfile("tabulated density has zero mass".into()));
            }
            let mean = m[1] / m[0];
            let var = m[2] / m[0] - mean * mean;
            if !(var > 0.0) {
                return Err(Error::InvalidProfile("tabulated density has zero variance".into()));
            }
            let sigma = var.sqrt();
            table = table.transformed(mean, sigma, sigma.ln() - m[0].ln());
        }
        let support = table_support(&table);
        let mut profile = Self::finish(name, Shape::Table(table), constants, support, source_dispersion)?;
        profile.cdf = Some(profile.build_cdf());
        Ok(profile)
    }

    fn finish(
        name: String,
        shape: Shape,
        constants: PhysConstants,
        support: (f64, f64),
        source_dispersion: Option<f64>,
    ) -> Result<Self> {
        let moments = raw_moments(&shape, support, PROFILE_QUADRATURE_POINTS);
        let mut profile = Self {
            name,
            shape,
            constants,
            support,
            moments,
            k: 0.0,
            c_g: 0.0,
            k_unweighted: 0.0,
            g0: [0.0; 3],
            source_dispersion,
            cdf: None,
            nodes: Vec::new(),
            rho_nodes: Vec::new(),
            step: 0.0,
        };
        let n = PROFILE_QUADRATURE_POINTS;
        profile.step = (support.1 - support.0) / (n - 1) as f64;
        profile.nodes = (0..n).map(|i| support.0 + i as f64 * profile.step).collect();
        profile.rho_nodes = profile.nodes.iter().map(|&x| profile.shape.log_derivatives(x)[0].exp()).collect();
        for (k, expected) in [(0usize, 1.0), (1, 0.0), (2, 1.0)] {
            if (moments[k] - expected).abs() > 1e-8 {
                return Err(Error::InvalidProfile(format!(
                    "moment {k} is {:.3e}, expected {expected}",
                    moments[k]
                )));
            }
        }
        let m = constants.mass;
        let hbar = constants.hbar;
        profile.k = profile.expect(|xi| profile.g(xi).powi(2));
        profile.c_g = profile.expect(|xi| {
            xi * (m * profile.g(xi) * profile.g_prime(xi) + 0.5 * hbar * profile.g_second(xi))
        });
        profile.k_unweighted = trapezoid(support, PROFILE_QUADRATURE_POINTS, |xi| profile.g(xi).powi(2));
        profile.g0 = [profile.g(0.0), profile.g_prime(0.0), profile.g_second(0.0)];
        if !(profile.k > 0.0) {
            return Err(Error::InvalidProfile("osmotic moment K must be positive".into()));
        }
        Ok(profile)
    }

    fn build_cdf(&self) -> CdfTable {
        let n = PROFILE_QUADRATURE_POINTS;
        let (lo, hi) = self.support;
        let h = (hi - lo) / (n - 1) as f64;
        let xi: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        let dens: Vec<f64> = xi.iter().map(|&x| self.rho_shape(x)).collect();
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i] + dens[i - 1]);
        }
        let total = cdf[n - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        CdfTable { xi, cdf }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constants(&self) -> PhysConstants {
        self.constants
    }

    /// Interval of ξ outside which ρ̃ is negligible (below e⁻⁴⁰ of its peak).
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Dispersion Δq₀ of the ground state the profile was measured from.
    pub fn source_dispersion(&self) -> Option<f64> {
        self.source_dispersion
    }

    /// [ln ρ̃, (ln ρ̃)′, (ln ρ̃)″, (ln ρ̃)‴] at ξ.
    pub fn log_derivatives(&self, xi: f64) -> [f64; 4] {
        self.shape.log_derivatives(xi)
    }

    pub fn rho_shape(&self, xi: f64) -> f64 {
        self.log_derivatives(xi)[0].exp()
    }

    pub fn g(&self, xi: f64) -> f64 {
        self.constants.diffusion() * self.log_derivatives(xi)[1]
    }

    pub fn g_prime(&self, xi: f64) -> f64 {
        self.constants.diffusion() * self.log_derivatives(xi)[2]
    }

    pub fn g_second(&self, xi: f64) -> f64 {
        self.constants.diffusion() * self.log_derivatives(xi)[3]
    }

    /// (G, G′, G″) at ξ in one evaluation.
    pub fn g_derivatives(&self, xi: f64) -> [f64; 3] {
        let l = self.log_derivatives(xi);
        let d = self.constants.diffusion();
        [d * l[1], d * l[2], d * l[3]]
    }

    /// K = ∫ G² ρ̃ dξ, so that ⟨u²⟩ = K/Δq².
    pub fn osmotic_moment(&self) -> f64 {
        self.k
    }

    /// C_G = ∫ ξ [m G G′ + (ħ/2) G″] ρ̃ dξ.
    pub fn dispersion_force_moment(&self) -> f64 {
        self.c_g
    }

    /// ∫ G² dξ without density weighting, integrated over the profile
    /// support only (it diverges on the full line for the Gaussian).
    pub fn unweighted_osmotic_moment(&self) -> f64 {
        self.k_unweighted
    }

    pub fn g0(&self) -> f64 {
        self.g0[0]
    }

    pub fn g0_prime(&self) -> f64 {
        self.g0[1]
    }

    pub fn g0_second(&self) -> f64 {
        self.g0[2]
    }

    /// ∫ ξᵏ ρ̃ dξ for k = 0..=8.
    pub fn moment(&self, k: usize) -> f64 {
        self.moments[k]
    }

    pub fn moments(&self) -> &[f64; 9] {
        &self.moments
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            osmotic_moment: self.k,
            dispersion_force_moment: self.c_g,
            unweighted_osmotic_moment: self.k_unweighted,
            g0: self.g0[0],
            g0_prime: self.g0[1],
            g0_second: self.g0[2],
        }
    }

    /// ∫ f(ξ) ρ̃(ξ) dξ over the support.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.nodes.len();
        let mut s = 0.0;
        for i in 0..n {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            s += w * f(self.nodes[i]) * self.rho_nodes[i];
        }
        s * self.step
    }

    /// Like [`StateProfile::expect`], but also evaluates the half-resolution
    /// rule and fails when the two disagree by more than
    /// [`QUADRATURE_CONVERGENCE_TOL`] (absolute, or relative to a large result).
    pub fn expect_checked(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let n = self.nodes.len();
        let mut fine = 0.0;
        let mut coarse = 0.0;
        for i in 0..n {
            let v = f(self.nodes[i]) * self.rho_nodes[i];
            let edge = i == 0 || i == n - 1;
            fine += if edge { 0.5 * v } else { v };
            if i % 2 == 0 {
                coarse += if edge { 0.5 * v } else { v };
            }
        }
        fine *= self.step;
        coarse *= 2.0 * self.step;
        let delta = (fine - coarse).abs();
        if delta > QUADRATURE_CONVERGENCE_TOL * fine.abs().max(1.0) {
            return Err(Error::QuadratureNotConverged { delta });
        }
        Ok(fine)
    }

    /// Same as [`StateProfile::expect`] with an explicit node count.
    pub fn expect_with(&self, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        trapezoid(self.support, n, |xi| f(xi) * self.rho_shape(xi))
    }

    /// Inverse cumulative distribution of ρ̃.
    pub fn quantile(&self, p: f64) -> f64 {
        match (&self.shape, &self.cdf) {
            (Shape::Gaussian, _) => Normal::standard().inverse_cdf(p),
            (Shape::Sech2 { a }, _) => (2.0 * p - 1.0).atanh() / a,
            (Shape::Table(_), Some(cdf)) => cdf.quantile(p),
            (Shape::Table(_), None) => unreachable!("tabulated profiles carry a CDF"),
        }
    }
}

fn trapezoid(support: (f64, f64), n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = support;
    let h = (hi - lo) / (n - 1) as f64;
    let mut s = 0.5 * (f(lo) + f(hi));
    for i in 1..n - 1 {
        s += f(lo + i as f64 * h);
    }
    s * h
}

fn raw_moments(shape: &Shape, support: (f64, f64), n: usize) -> [f64; 9] {
    let (lo, hi) = support;
    let h = (hi - lo) / (n - 1) as f64;
    let mut m = [0.0; 9];
    for i in 0..n {
        let xi = lo + i as f64 * h;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let r = shape.log_derivatives(xi)[0].exp() * w * h;
        let mut p = 1.0;
        for mk in m.iter_mut() {
            *mk += p * r;
            p *= xi;
        }
    }
    m
}

/// Range where a tabulated log-density stays within the support drop of
/// its peak, including the extrapolated tails.
fn table_support(table: &TableShape) -> (f64, f64) {
    let peak = table.nodes.iter().map(|n| n[0]).fold(f64::NEG_INFINITY, f64::max);
    let floor = peak - SUPPORT_LOG_DROP;
    let reach = |node: [f64; 3], end: f64, dir: f64| {
        if node[0] <= floor {
            return end;
        }
        // decay rate b = −dL/dd along the outward direction; solve
        // L0 − b·d + ½ min(L″,0)·d² = floor
        let slope = -node[1] * dir;
        let curv = node[2].min(0.0);
        let gap = node[0] - floor;
        let d = if curv < 0.0 {
            let a = -0.5 * curv;
            (-slope + (slope * slope + 4.0 * a * gap).sqrt()) / (2.0 * a)
        } else {
            gap / slope
        };
        end + dir * d
    };
    let n = table.xi.len();
    (
        reach(table.nodes[0], table.xi[0], -1.0),
        reach(table.nodes[n - 1], table.xi[n - 1], 1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use num_complex::Complex64;

    fn ground_state(grid: &Grid1D, f: impl Fn(f64) -> f64) -> WaveFunction {
        WaveFunction::from_fn(grid.clone(), PhysConstants::natural(), |x| Complex64::new(f(x), 0.0))
            .unwrap()
            .normalized()
            .unwrap()
    }

    #[test]
    fn gaussian_profile_moments() {
        let p = StateProfile::gaussian(PhysConstants::natural());
        assert!((p.osmotic_moment() - 0.25).abs() < 1e-12);
        assert!((p.dispersion_force_moment() - 0.25).abs() < 1e-12);
        assert_eq!(p.g0(), 0.0);
        assert_eq!(p.g0_prime(), -0.5);
        assert!((p.g(1.7) + 0.85).abs() < 1e-15);
        assert!((p.moment(4) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn sech2_moments_against_direct_quadrature() {
        let c = PhysConstants::natural();
        let p = StateProfile::sech2(c);
        // independent oracle: closed-form sech² fields at doubled resolution
        let a = PI / 12f64.sqrt();
        let rho = |x: f64| 0.5 * a / (a * x).cosh().powi(2);
        let g = |x: f64| -a * (a * x).tanh();
        let gp = |x: f64| -a * a / (a * x).cosh().powi(2);
        let gpp = |x: f64| 2.0 * a.powi(3) * (a * x).tanh() / (a * x).cosh().powi(2);
        let n = 2 * PROFILE_QUADRATURE_POINTS;
        let k = trapezoid(p.support(), n, |x| g(x).powi(2) * rho(x));
        let cg = trapezoid(p.support(), n, |x| x * (g(x) * gp(x) + 0.5 * gpp(x)) * rho(x));
        assert!((p.osmotic_moment() - k).abs() < 1e-8);
        assert!((p.dispersion_force_moment() - cg).abs() < 1e-8);
        // both equal a²/3 analytically
        assert!((k - a * a / 3.0).abs() < 1e-10);
        assert!(p.osmotic_moment() > 0.25);
    }

    #[test]
    fn profile_from_harmonic_ground_state() {
        let grid = Grid1D::default();
        let d0 = 1.0 / 2f64.sqrt();
        let psi0 = ground_state(&grid, |x| (-x * x / (4.0 * d0 * d0)).exp());
        let p = StateProfile::from_ground_state(&psi0).unwrap();
        assert!((p.source_dispersion().unwrap() - d0).abs() < 1e-12);
        assert!((p.osmotic_moment() - 0.25).abs() < 1e-8);
        assert!((p.dispersion_force_moment() - 0.25).abs() < 1e-8);
        assert!(p.g0().abs() < 1e-8);
        assert!((p.g0_prime() + 0.5).abs() < 1e-8);
        for xi in [-3.0, -1.0, 0.4, 2.2] {
            assert!((p.g(xi) + 0.5 * xi).abs() < 1e-8, "ξ={xi}");
        }
    }

    #[test]
    fn profile_from_sech_ground_state_matches_builtin() {
        let grid = Grid1D::new(-30.0, 30.0, 2048).unwrap();
        let psi0 = ground_state(&grid, |x| 1.0 / (1.3 * x).cosh());
        let p = StateProfile::from_ground_state(&psi0).unwrap();
        let b = StateProfile::sech2(PhysConstants::natural());
        assert!((p.osmotic_moment() - b.osmotic_moment()).abs() < 1e-8);
        assert!((p.dispersion_force_moment() - b.dispersion_force_moment()).abs() < 1e-7);
        for xi in [-2.0, 0.5, 3.0] {
            assert!((p.g(xi) - b.g(xi)).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_phased_and_nodal_ground_states() {
        let grid = Grid1D::default();
        let chirped = WaveFunction::from_fn(grid.clone(), PhysConstants::natural(), |x| {
            Complex64::from_polar((-x * x / 2.0).exp(), 0.3 * x * x)
        })
        .unwrap()
        .normalized()
        .unwrap();
        assert!(matches!(StateProfile::from_ground_state(&chirped), Err(Error::InvalidProfile(_))));

        let excited = ground_state(&grid, |x| x * (-x * x / 2.0).exp());
        assert!(matches!(StateProfile::from_ground_state(&excited), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn table_profile_is_standardized() {
        // unnormalized, shifted, wide Gaussian table
        let xi: Vec<f64> = (0..161).map(|i| -8.0 + 0.1 * i as f64 + 1.5).collect();
        let rho: Vec<f64> = xi.iter().map(|x| 3.0 * (-(x - 1.5f64).powi(2) / 8.0).exp()).collect();
        let p = StateProfile::from_table("wide", &xi, &rho, PhysConstants::natural()).unwrap();
        assert!((p.moment(0) - 1.0).abs() < 1e-8);
        assert!(p.moment(1).abs() < 1e-8);
        assert!((p.moment(2) - 1.0).abs() < 1e-8);
        assert!((p.osmotic_moment() - 0.25).abs() < 1e-4);
        assert!((p.quantile(0.5)).abs() < 1e-3);
    }

    #[test]
    fn quantiles_invert_the_density() {
        for p in [StateProfile::gaussian(PhysConstants::natural()), StateProfile::sech2(PhysConstants::natural())] {
            for prob in [0.01, 0.3, 0.5, 0.77] {
                let x = p.quantile(prob);
                let cdf = trapezoid((p.support().0, x), 20001, |s| p.rho_shape(s));
                assert!((cdf - prob).abs() < 1e-7, "{} at {prob}", p.name());
            }
        }
    }

    #[test]
    fn unknown_profile_name() {
        assert!(StateProfile::by_name("lorentzian", PhysConstants::natural()).is_err());
    }
}
