//! Synthetic far-field data.
//!
//! Two models are available. The small-volume asymptotic formulas give the
//! single-scattering far field directly. The Foldy–Lax model treats each
//! inhomogeneity as a point scatterer (a monopole for permittivity contrast, a
//! dipole for permeability contrast) and solves for the self-consistent
//! exciting fields, so it includes multiple scattering. Both models radiate
//! through the same routines, so switching the coupling off reproduces the
//! asymptotic values bit for bit.

use crate::error::{MusicError, Result};
use crate::scene::{Scene, Vec2};
use crate::specfun::{bessel_j, bessel_y};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Linear systems with a larger 2-norm condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Which material parameter carries the contrast.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContrastMode {
    Permittivity,
    Permeability,
}

impl ContrastMode {
    /// The parameter that must equal the background is actually equal.
    pub fn check_compatible(self, scene: &Scene) -> Result<()> {
        let bg = scene.background();
        for (s, inh) in scene.inhomogeneities().iter().enumerate() {
            let mismatch = match self {
                ContrastMode::Permittivity => inh.mu != bg.mu,
                ContrastMode::Permeability => inh.eps != bg.eps,
            };
            if mismatch {
                return Err(MusicError::Config(format!(
                    "{self:?} mode requires inhomogeneity {s} to have {} equal to the background",
                    self.other_parameter()
                )));
            }
        }
        Ok(())
    }

    /// Compatible, and at least one inhomogeneity differs in the contrast parameter.
    pub fn check_strict(self, scene: &Scene) -> Result<()> {
        self.check_compatible(scene)?;
        let bg = scene.background();
        let any = scene.inhomogeneities().iter().any(|inh| match self {
            ContrastMode::Permittivity => inh.eps != bg.eps,
            ContrastMode::Permeability => inh.mu != bg.mu,
        });
        if any {
            Ok(())
        } else {
            Err(MusicError::Config(format!(
                "{self:?} mode requires some inhomogeneity with {} different from the background",
                self.parameter()
            )))
        }
    }

    fn parameter(self) -> &'static str {
        match self {
            ContrastMode::Permittivity => "eps",
            ContrastMode::Permeability => "mu",
        }
    }

    fn other_parameter(self) -> &'static str {
        match self {
            ContrastMode::Permittivity => "mu",
            ContrastMode::Permeability => "eps",
        }
    }

    /// Rank of noiseless asymptotic data for `s` inhomogeneities.
    pub fn expected_rank(self, s: usize) -> usize {
        match self {
            ContrastMode::Permittivity => s,
            ContrastMode::Permeability => 2 * s,
        }
    }
}

/// Forward model used to synthesise data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForwardKind {
    Asymptotic,
    #[default]
    FoldyLax,
}

/// Whether the Foldy–Lax solver keeps the inter-scatterer coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    Full,
    /// Single scattering only.
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FarFieldSample {
    pub value: Complex64,
    pub observation: Vec2,
    pub incidence: Vec2,
}

/// `(1 + i) / (4 sqrt(kπ))`.
fn farfield_prefactor(k: f64) -> Complex64 {
    Complex64::new(1.0, 1.0) / (4.0 * (k * PI).sqrt())
}

/// Monopole strengths `k² α² π (ε_s - ε_b) / sqrt(ε_b μ_b)`.
fn monopole_strengths(scene: &Scene) -> Vec<f64> {
    let k = scene.wavenumber();
    let bg = scene.background();
    let area = scene.radius().powi(2) * PI;
    scene
        .inhomogeneities()
        .iter()
        .map(|inh| k * k * area * (inh.eps - bg.eps) / (bg.eps * bg.mu).sqrt())
        .collect()
}

/// Dipole strengths `k² α² π · 2μ_b / (μ_s + μ_b)`.
fn dipole_strengths(scene: &Scene) -> Vec<f64> {
    let k = scene.wavenumber();
    let bg = scene.background();
    let area = scene.radius().powi(2) * PI;
    scene
        .inhomogeneities()
        .iter()
        .map(|inh| k * k * area * (2.0 * bg.mu / (inh.mu + bg.mu)))
        .collect()
}

fn plane_wave(k: f64, direction: Vec2, r: Vec2) -> Complex64 {
    Complex64::cis(k * direction.dot(r))
}

fn outgoing(k: f64, observation: Vec2, r: Vec2) -> Complex64 {
    Complex64::cis(-k * observation.dot(r))
}

fn radiate_monopoles(k: f64, observation: Vec2, centers: &[Vec2], strengths: &[f64], fields: &[Complex64]) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for ((&r, &c), &e) in centers.iter().zip(strengths).zip(fields) {
        sum += c * e * outgoing(k, observation, r);
    }
    farfield_prefactor(k) * sum
}

fn radiate_dipoles(k: f64, observation: Vec2, centers: &[Vec2], strengths: &[f64], fields: &[[Complex64; 2]]) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for ((&r, &q), w) in centers.iter().zip(strengths).zip(fields) {
        let projected = observation.x * w[0] + observation.y * w[1];
        sum += q * projected * outgoing(k, observation, r);
    }
    farfield_prefactor(k) * sum
}

fn incident_monopole_fields(k: f64, incidence: Vec2, centers: &[Vec2]) -> Vec<Complex64> {
    centers.iter().map(|&r| plane_wave(k, incidence, r)).collect()
}

/// `∇u_inc / (ik) = θ e^{ikθ·r}`.
fn incident_dipole_fields(k: f64, incidence: Vec2, centers: &[Vec2]) -> Vec<[Complex64; 2]> {
    centers
        .iter()
        .map(|&r| {
            let e = plane_wave(k, incidence, r);
            [incidence.x * e, incidence.y * e]
        })
        .collect()
}

/// Asymptotic far field for a permittivity contrast.
pub fn farfield_eps(scene: &Scene, observation: Vec2, incidence: Vec2) -> Result<Complex64> {
    ContrastMode::Permittivity.check_compatible(scene)?;
    let k = scene.wavenumber();
    let centers: Vec<Vec2> = scene.centers().collect();
    let fields = incident_monopole_fields(k, incidence, &centers);
    Ok(radiate_monopoles(k, observation, &centers, &monopole_strengths(scene), &fields))
}

/// Asymptotic far field for a permeability contrast.
pub fn farfield_mu(scene: &Scene, observation: Vec2, incidence: Vec2) -> Result<Complex64> {
    ContrastMode::Permeability.check_compatible(scene)?;
    let k = scene.wavenumber();
    let centers: Vec<Vec2> = scene.centers().collect();
    let fields = incident_dipole_fields(k, incidence, &centers);
    Ok(radiate_dipoles(k, observation, &centers, &dipole_strengths(scene), &fields))
}

/// One asymptotic sample with its directions.
pub fn farfield_sample(scene: &Scene, mode: ContrastMode, observation: Vec2, incidence: Vec2) -> Result<FarFieldSample> {
    let value = match mode {
        ContrastMode::Permittivity => farfield_eps(scene, observation, incidence)?,
        ContrastMode::Permeability => farfield_mu(scene, observation, incidence)?,
    };
    Ok(FarFieldSample { value, observation, incidence })
}

fn assemble_columns(rows: usize, cols: usize, column: impl Fn(usize) -> Vec<Complex64> + Sync + Send) -> DMatrix<Complex64> {
    let columns: Vec<Vec<Complex64>> = (0..cols).into_par_iter().map(column).collect();
    DMatrix::from_iterator(rows, cols, columns.into_iter().flatten())
}

/// `M × N` matrix of asymptotic far-field values, rows indexed by observation.
pub fn asymptotic_matrix(scene: &Scene, mode: ContrastMode, observed: &[Vec2], incident: &[Vec2]) -> Result<DMatrix<Complex64>> {
    mode.check_compatible(scene)?;
    let k = scene.wavenumber();
    let centers: Vec<Vec2> = scene.centers().collect();
    Ok(match mode {
        ContrastMode::Permittivity => {
            let c = monopole_strengths(scene);
            assemble_columns(observed.len(), incident.len(), |n| {
                let fields = incident_monopole_fields(k, incident[n], &centers);
                observed.iter().map(|&o| radiate_monopoles(k, o, &centers, &c, &fields)).collect()
            })
        }
        ContrastMode::Permeability => {
            let q = dipole_strengths(scene);
            assemble_columns(observed.len(), incident.len(), |n| {
                let fields = incident_dipole_fields(k, incident[n], &centers);
                observed.iter().map(|&o| radiate_dipoles(k, o, &centers, &q, &fields)).collect()
            })
        }
    })
}

/// Coupling kernel `G(ρ) = (i/4) H_0^{(1)}(kρ)`, the outgoing radiating solution
/// of `ΔG + k²G = -δ`.
fn coupling_green(k: f64, rho: f64) -> Result<Complex64> {
    let kr = k * rho;
    Ok(Complex64::i() * 0.25 * Complex64::new(bessel_j(0, kr)?, bessel_y(0, kr)?))
}

/// `-Hess G` at offset `d = r_s - r_s'`, as a row-major 2×2 block.
fn coupling_hessian(k: f64, d: Vec2) -> Result<[[Complex64; 2]; 2]> {
    let rho = d.norm();
    let kr = k * rho;
    let h0 = Complex64::new(bessel_j(0, kr)?, bessel_y(0, kr)?);
    let h1 = Complex64::new(bessel_j(1, kr)?, bessel_y(1, kr)?);
    let quarter_i = Complex64::new(0.0, 0.25);
    let g1 = -quarter_i * k * h1;
    let g2 = quarter_i * k * k * (-h0 + h1 / kr);
    let u = [d.x / rho, d.y / rho];
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            let radial = u[a] * u[b];
            let identity = if a == b { 1.0 } else { 0.0 };
            *entry = -(g2 * radial + (g1 / rho) * (identity - radial));
        }
    }
    Ok(out)
}

fn condition_number(a: &DMatrix<Complex64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 { f64::INFINITY } else { max / min }
}

fn solve_checked(system: DMatrix<Complex64>, rhs: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let cond = condition_number(&system);
    if !(cond <= MAX_CONDITION) {
        return Err(MusicError::Numerical(format!(
            "Foldy–Lax system is singular or resonant (condition number {cond:.3e} > {MAX_CONDITION:.0e})"
        )));
    }
    system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| MusicError::Numerical(format!("Foldy–Lax LU solve failed (condition number {cond:.3e})")))
}

/// Multiple-scattering far field, `M × N`, rows indexed by observation.
pub fn solve_foldy_lax(scene: &Scene, incident: &[Vec2], observed: &[Vec2], mode: ContrastMode) -> Result<DMatrix<Complex64>> {
    solve_foldy_lax_with(scene, incident, observed, mode, Coupling::Full)
}

pub fn solve_foldy_lax_with(
    scene: &Scene,
    incident: &[Vec2],
    observed: &[Vec2],
    mode: ContrastMode,
    coupling: Coupling,
) -> Result<DMatrix<Complex64>> {
    mode.check_compatible(scene)?;
    let k = scene.wavenumber();
    let centers: Vec<Vec2> = scene.centers().collect();
    let s_count = centers.len();
    let coupled = coupling == Coupling::Full && s_count > 1;
    match mode {
        ContrastMode::Permittivity => {
            let c = monopole_strengths(scene);
            let mut exciting: Vec<Vec<Complex64>> =
                incident.iter().map(|&t| incident_monopole_fields(k, t, &centers)).collect();
            if coupled {
                let mut system = DMatrix::<Complex64>::identity(s_count, s_count);
                for s in 0..s_count {
                    for t in 0..s_count {
                        if s != t {
                            let g = coupling_green(k, centers[s].distance(centers[t]))?;
                            system[(s, t)] -= c[t] * g;
                        }
                    }
                }
                let rhs = DMatrix::from_fn(s_count, incident.len(), |s, n| exciting[n][s]);
                let sol = solve_checked(system, rhs)?;
                for (n, fields) in exciting.iter_mut().enumerate() {
                    for (s, f) in fields.iter_mut().enumerate() {
                        *f = sol[(s, n)];
                    }
                }
            }
            Ok(assemble_columns(observed.len(), incident.len(), |n| {
                observed.iter().map(|&o| radiate_monopoles(k, o, &centers, &c, &exciting[n])).collect()
            }))
        }
        ContrastMode::Permeability => {
            let q = dipole_strengths(scene);
            let mut exciting: Vec<Vec<[Complex64; 2]>> =
                incident.iter().map(|&t| incident_dipole_fields(k, t, &centers)).collect();
            if coupled {
                let dim = 2 * s_count;
                let mut system = DMatrix::<Complex64>::identity(dim, dim);
                for s in 0..s_count {
                    for t in 0..s_count {
                        if s == t {
                            continue;
                        }
                        let block = coupling_hessian(k, centers[s] - centers[t])?;
                        let weight = q[t] / (k * k);
                        for a in 0..2 {
                            for b in 0..2 {
                                system[(2 * s + a, 2 * t + b)] -= weight * block[a][b];
                            }
                        }
                    }
                }
                let rhs = DMatrix::from_fn(dim, incident.len(), |i, n| exciting[n][i / 2][i % 2]);
                let sol = solve_checked(system, rhs)?;
                for (n, fields) in exciting.iter_mut().enumerate() {
                    for (s, f) in fields.iter_mut().enumerate() {
                        *f = [sol[(2 * s, n)], sol[(2 * s + 1, n)]];
                    }
                }
            }
            Ok(assemble_columns(observed.len(), incident.len(), |n| {
                observed.iter().map(|&o| radiate_dipoles(k, o, &centers, &q, &exciting[n])).collect()
            }))
        }
    }
}

/// Far-field matrix from the selected model.
pub fn farfield_matrix(
    scene: &Scene,
    mode: ContrastMode,
    kind: ForwardKind,
    observed: &[Vec2],
    incident: &[Vec2],
) -> Result<DMatrix<Complex64>> {
    match kind {
        ForwardKind::Asymptotic => asymptotic_matrix(scene, mode, observed, incident),
        ForwardKind::FoldyLax => solve_foldy_lax(scene, incident, observed, mode),
    }
}

/// Adds complex white Gaussian noise at a global SNR.
///
/// The noise variance is `‖K‖_F² / (MN · 10^{snr/10})`, split evenly between
/// real and imaginary parts. `snr_db = +∞` returns the input unchanged.
pub fn add_noise(data: &DMatrix<Complex64>, snr_db: f64, seed: u64) -> Result<DMatrix<Complex64>> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(MusicError::Domain(format!("snr_db = {snr_db} is not a usable SNR")));
    }
    if snr_db == f64::INFINITY {
        return Ok(data.clone());
    }
    let energy = data.norm_squared();
    if energy == 0.0 || data.is_empty() {
        return Err(MusicError::Domain("SNR is undefined for an all-zero matrix".into()));
    }
    let variance = energy / (data.len() as f64 * 10f64.powf(snr_db / 10.0));
    let component_sd = (0.5 * variance).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = data.clone();
    for v in noisy.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *v += Complex64::new(component_sd * re, component_sd * im);
    }
    Ok(noisy)
}

/// Realised `10 log10(‖clean‖² / ‖noisy - clean‖²)`; `+∞` when identical.
pub fn empirical_snr_db(clean: &DMatrix<Complex64>, noisy: &DMatrix<Complex64>) -> f64 {
    let noise = (noisy - clean).norm_squared();
    if noise == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (clean.norm_squared() / noise).log10()
    }
}
