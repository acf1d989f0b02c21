//! Arc-restricted Bessel series and the imaging profiles they predict.
//!
//! For `d = |d| [cos φ, sin φ]` and an arc `[ϑ_1, ϑ_M]` with width
//! `Δ = ϑ_M - ϑ_1` and angle sum `Σ = ϑ_M + ϑ_1`, the Jacobi–Anger expansion
//! integrates term by term:
//!
//! ```text
//! (1/Δ) ∫ e^{-ikϑ·d} dϑ = J_0(k|d|) + (4/Δ) Σ_{p≥1} (i^p/p) J_p(k|d|) sin(pΔ/2) cos(p(Σ - 2φ + 2π)/2)
//! ```
//!
//! The direction-weighted integrals `I_h(d) = ∫ (-ϑ·e_h) e^{-ikϑ·d} dϑ` are
//!
//! ```text
//! I_1 = -2 J_0 sin(Δ/2) cos(Σ/2) + i J_1 [Δ cos φ + sin Δ cos(Σ - φ)]
//!       - 2 Σ_{p≥2} (-i)^p J_p [ sin((p+1)Δ/2) cos(((p+1)Σ - 2pφ)/2) / (p+1)
//!                             + sin((p-1)Δ/2) cos(((p-1)Σ - 2pφ)/2) / (p-1) ]
//! I_2 = -2 J_0 sin(Δ/2) sin(Σ/2) + i J_1 [Δ sin φ + sin Δ sin(Σ - φ)]
//!       - 2 Σ_{p≥2} (-i)^p J_p [ sin((p+1)Δ/2) sin(((p+1)Σ - 2pφ)/2) / (p+1)
//!                             - sin((p-1)Δ/2) sin(((p-1)Σ - 2pφ)/2) / (p-1) ]
//! ```
//!
//! The Λ terms are what is left after removing the full-aperture kernels
//! (`Δ J_0` and `i Δ J_1 d̂_h`); all of them vanish when `Δ = 2π`.
//! Incidence-side quantities use `e^{+ikθ·d}` and weight `+θ·e_h`; they are
//! obtained from the observation-side formulas by conjugation.

use crate::error::{MusicError, Result};
use crate::imaging::{TestSide, DEFAULT_FLOOR};
use crate::scene::{to_polar, ApertureArc, ArcPair, Axis, Scene, Vec2};
use crate::specfun::bessel_j_sequence;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-14;
/// Orders kept beyond `k|d|` when no explicit maximum order is given.
pub const DEFAULT_EXTRA_ORDERS: u32 = 40;

/// Where the infinite Bessel series are cut.
///
/// With `max_order = None` the cut is `ceil(k|d|) + 40`. Either way the
/// series stops early once the majorant `|J_p(x)| ≤ (x/2)^p / p!` certifies
/// that the remaining terms sum to less than `tail_tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesTruncation {
    #[serde(default)]
    pub max_order: Option<u32>,
    #[serde(default = "default_tail_tolerance")]
    pub tail_tolerance: f64,
}

fn default_tail_tolerance() -> f64 {
    DEFAULT_TAIL_TOLERANCE
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        SeriesTruncation { max_order: None, tail_tolerance: DEFAULT_TAIL_TOLERANCE }
    }
}

impl SeriesTruncation {
    pub fn fixed(max_order: u32) -> Self {
        SeriesTruncation { max_order: Some(max_order), tail_tolerance: DEFAULT_TAIL_TOLERANCE }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order == Some(0) {
            return Err(MusicError::Config("truncation.max_order must be ≥ 1".into()));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(MusicError::Config("truncation.tail_tolerance must be > 0".into()));
        }
        Ok(())
    }

    /// Highest order used at argument `x` for series whose coefficients are
    /// bounded by `scale`.
    fn order_for(&self, x: f64, scale: f64) -> usize {
        let cap = self.max_order.unwrap_or(x.ceil() as u32 + DEFAULT_EXTRA_ORDERS) as usize;
        if x == 0.0 {
            return cap.min(1);
        }
        // ln of (x/2)^(p+1) / (p+1)!, built up incrementally
        let half = 0.5 * x;
        let mut log_term = 0.0;
        for p in 0..cap {
            log_term += half.ln() - ((p + 1) as f64).ln();
            // beyond p + 2 > x the terms shrink by at least half, so the tail is under twice the first one
            if (p + 2) as f64 > x && (2.0 * scale).ln() + log_term < self.tail_tolerance.ln() {
                return p.max(1);
            }
        }
        cap
    }

    /// Upper bound on the neglected terms for the order chosen at `x`.
    pub fn tail_bound(&self, x: f64, scale: f64) -> f64 {
        let p = self.order_for(x, scale) as u32;
        let half = 0.5 * x;
        let mut log_term = 0.0;
        for q in 1..=(p + 1) {
            log_term += half.ln() - f64::from(q).ln();
        }
        if f64::from(p + 2) > x { 2.0 * scale * log_term.exp() } else { f64::INFINITY }
    }
}

fn check_inputs(d: Vec2, arc: &ApertureArc, k: f64) -> Result<()> {
    arc.validate()?;
    if !d.is_finite() {
        return Err(MusicError::Domain("offset d must be finite".into()));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(MusicError::Domain(format!("wavenumber {k} must be > 0")));
    }
    Ok(())
}

fn i_pow(p: usize) -> Complex64 {
    match p % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `(x = k|d|, φ, [J_0 .. J_P])`.
fn bessel_terms(d: Vec2, k: f64, trunc: &SeriesTruncation, scale: f64) -> Result<(f64, f64, Vec<f64>)> {
    trunc.validate()?;
    let polar = to_polar(d);
    let x = k * polar.magnitude;
    let order = trunc.order_for(x, scale);
    Ok((x, polar.angle, bessel_j_sequence(order.max(1), x)?))
}

/// `4 Σ_{p≥1} (i^p/p) J_p sin(pΔ/2) cos(p(Σ - 2φ + s)/2)`, `s = 2π` on the
/// observation side and `0` on the incidence side.
fn lambda_eps_series(phi: f64, arc: &ApertureArc, side: TestSide, js: &[f64]) -> Complex64 {
    let width = arc.width();
    let shift = match side {
        TestSide::Observation => TAU,
        TestSide::Incidence => 0.0,
    };
    let angle = arc.angle_sum() - 2.0 * phi + shift;
    let mut sum = Complex64::new(0.0, 0.0);
    for (p, &j) in js.iter().enumerate().skip(1) {
        let pf = p as f64;
        sum += i_pow(p) * (j / pf * (0.5 * pf * width).sin() * (0.5 * pf * angle).cos());
    }
    4.0 * sum
}

/// `Λ_ε`: the aperture correction to `Δ J_0(k|d|)`.
pub fn lambda_eps(d: Vec2, arc: &ApertureArc, side: TestSide, trunc: &SeriesTruncation, k: f64) -> Result<Complex64> {
    check_inputs(d, arc, k)?;
    let (_, phi, js) = bessel_terms(d, k, trunc, 4.0)?;
    Ok(lambda_eps_series(phi, arc, side, &js))
}

/// Arc mean of `e^{-ikϑ·d}` over the observation arc.
pub fn arc_mean_exponential(d: Vec2, arc: &ApertureArc, trunc: &SeriesTruncation, k: f64) -> Result<Complex64> {
    arc_mean_exponential_side(d, arc, TestSide::Observation, trunc, k)
}

/// Arc mean of `e^{-ikϑ·d}` (observation) or `e^{+ikθ·d}` (incidence).
pub fn arc_mean_exponential_side(
    d: Vec2,
    arc: &ApertureArc,
    side: TestSide,
    trunc: &SeriesTruncation,
    k: f64,
) -> Result<Complex64> {
    check_inputs(d, arc, k)?;
    let width = arc.width();
    let (_, phi, js) = bessel_terms(d, k, trunc, 4.0 / width.min(1.0))?;
    Ok(js[0] + lambda_eps_series(phi, arc, side, &js) / width)
}

/// `I_h(d) = ∫ (-ϑ·e_h) e^{-ikϑ·d} dϑ` over the arc.
fn weighted_integral(phi: f64, arc: &ApertureArc, h: Axis, js: &[f64]) -> Complex64 {
    let width = arc.width();
    let sum_angle = arc.angle_sum();
    let sw = (0.5 * width).sin();
    let i = Complex64::i();
    let mut total = match h {
        Axis::One => {
            let j0 = Complex64::from(-2.0 * js[0] * sw * (0.5 * sum_angle).cos());
            let j1 = i * js[1] * (width * phi.cos() + width.sin() * (sum_angle - phi).cos());
            j0 + j1
        }
        Axis::Two => {
            let j0 = Complex64::from(-2.0 * js[0] * sw * (0.5 * sum_angle).sin());
            let j1 = i * js[1] * (width * phi.sin() + width.sin() * (sum_angle - phi).sin());
            j0 + j1
        }
    };
    for (p, &j) in js.iter().enumerate().skip(2) {
        let pf = p as f64;
        let up = pf + 1.0;
        let down = pf - 1.0;
        let a_up = 0.5 * (up * sum_angle - 2.0 * pf * phi);
        let a_down = 0.5 * (down * sum_angle - 2.0 * pf * phi);
        let s_up = (0.5 * up * width).sin() / up;
        let s_down = (0.5 * down * width).sin() / down;
        let bracket = match h {
            Axis::One => s_up * a_up.cos() + s_down * a_down.cos(),
            Axis::Two => s_up * a_up.sin() - s_down * a_down.sin(),
        };
        // (-i)^p = i^{3p}
        total += -2.0 * j * bracket * i_pow(3 * p);
    }
    total
}

fn unit_component(d: Vec2, h: Axis) -> f64 {
    let n = d.norm();
    if n == 0.0 { 0.0 } else { d.axis(h) / n }
}

/// `∫ (-ϑ·e_h) e^{-ikϑ·d} dϑ / C` over the observation arc, with
/// `C = Δ/2 + ½ cos(Σ) sin(Δ)`.
pub fn arc_mean_weighted(d: Vec2, arc: &ApertureArc, h: Axis, trunc: &SeriesTruncation, k: f64) -> Result<Complex64> {
    check_inputs(d, arc, k)?;
    let c = arc.weighted_normalizer();
    if c.abs() < crate::imaging::DEGENERATE_NORMALIZER {
        return Err(MusicError::Domain(format!("aperture normaliser {c:.3e} is degenerate")));
    }
    let (_, phi, js) = bessel_terms(d, k, trunc, 4.0)?;
    Ok(weighted_integral(phi, arc, h, &js) / c)
}

/// `Λ_μ`: the aperture correction to `i Δ J_1(k|d|) (d̂·e_h)`.
///
/// Observation side: `I_h - iΔ J_1 d̂_h`. Incidence side: the same with
/// `∫ (θ·e_h) e^{+ikθ·d} dθ` in place of `I_h`, which is `-conj(I_h)`.
pub fn lambda_mu(d: Vec2, arc: &ApertureArc, side: TestSide, h: Axis, trunc: &SeriesTruncation, k: f64) -> Result<Complex64> {
    check_inputs(d, arc, k)?;
    let (_, phi, js) = bessel_terms(d, k, trunc, 4.0)?;
    let observation = weighted_integral(phi, arc, h, &js) - Complex64::i() * (arc.width() * js[1] * unit_component(d, h));
    Ok(match side {
        TestSide::Observation => observation,
        TestSide::Incidence => -observation.conj(),
    })
}

fn inverse_sqrt_clamped(x: f64, floor: f64) -> f64 {
    1.0 / x.max(floor * floor).sqrt()
}

fn check_floor(floor: f64) -> Result<()> {
    if floor > 0.0 && floor.is_finite() { Ok(()) } else { Err(MusicError::Config(format!("floor {floor} must be > 0"))) }
}

/// Predicted imaging function for permittivity contrast:
/// `½ (1 - Σ_s |Φ_1|²)^{-1/2} + ½ (1 - Σ_s |Φ_2|²)^{-1/2}` with
/// `Φ_1 = J_0 + Λ_ε/Δϑ` and `Φ_2 = J_0 + Λ_ε/Δθ` evaluated at `r - r_s`.
/// Arguments below `floor²` are clamped.
pub fn structure_eps(r: Vec2, scene: &Scene, arcs: &ArcPair, trunc: &SeriesTruncation) -> Result<f64> {
    structure_eps_with_floor(r, scene, arcs, trunc, DEFAULT_FLOOR)
}

pub fn structure_eps_with_floor(r: Vec2, scene: &Scene, arcs: &ArcPair, trunc: &SeriesTruncation, floor: f64) -> Result<f64> {
    check_floor(floor)?;
    let (obs, inc) = residual_eps(r, scene, arcs, trunc)?;
    Ok(0.5 * inverse_sqrt_clamped(obs, floor) + 0.5 * inverse_sqrt_clamped(inc, floor))
}

/// `(1 - Σ_s |Φ_1|², 1 - Σ_s |Φ_2|²)`: predicted squared noise-space norms
/// of the plane-wave test vectors.
pub fn residual_eps(r: Vec2, scene: &Scene, arcs: &ArcPair, trunc: &SeriesTruncation) -> Result<(f64, f64)> {
    let k = scene.wavenumber();
    let mut obs = 1.0;
    let mut inc = 1.0;
    for c in scene.centers() {
        let d = r - c;
        obs -= arc_mean_exponential_side(d, &arcs.observation, TestSide::Observation, trunc, k)?.norm_sqr();
        inc -= arc_mean_exponential_side(d, &arcs.incidence, TestSide::Incidence, trunc, k)?.norm_sqr();
    }
    Ok((obs, inc))
}

/// `Φ_h = i J_1(k|d|)(d̂·e_h) + Λ_μ/Δ` on one side.
fn phi_mu(d: Vec2, arc: &ApertureArc, side: TestSide, h: Axis, trunc: &SeriesTruncation, k: f64) -> Result<Complex64> {
    let (_, _, js) = bessel_terms(d, k, trunc, 4.0)?;
    let lambda = lambda_mu(d, arc, side, h, trunc, k)?;
    Ok(Complex64::i() * (js[1] * unit_component(d, h)) + lambda / arc.width())
}

/// Predicted imaging function for permeability contrast with plane-wave test
/// vectors; like [`structure_eps`] with `Φ_h` summed over both axes.
pub fn structure_mu(r: Vec2, scene: &Scene, arcs: &ArcPair, trunc: &SeriesTruncation) -> Result<f64> {
    structure_mu_with_floor(r, scene, arcs, trunc, DEFAULT_FLOOR)
}

pub fn structure_mu_with_floor(r: Vec2, scene: &Scene, arcs: &ArcPair, trunc: &SeriesTruncation, floor: f64) -> Result<f64> {
    check_floor(floor)?;
    let (obs, inc) = residual_mu(r, scene, arcs, trunc)?;
    Ok(0.5 * inverse_sqrt_clamped(obs, floor) + 0.5 * inverse_sqrt_clamped(inc, floor))
}

/// `(1 - Σ_s Σ_h |Φ_h|², ...)` on the observation and incidence sides.
pub fn residual_mu(r: Vec2, scene: &Scene, arcs: &ArcPair, trunc: &SeriesTruncation) -> Result<(f64, f64)> {
    let k = scene.wavenumber();
    let mut obs = 1.0;
    let mut inc = 1.0;
    for c in scene.centers() {
        let d = r - c;
        for h in Axis::BOTH {
            obs -= phi_mu(d, &arcs.observation, TestSide::Observation, h, trunc, k)?.norm_sqr();
            inc -= phi_mu(d, &arcs.incidence, TestSide::Incidence, h, trunc, k)?.norm_sqr();
        }
    }
    Ok((obs, inc))
}

/// Weight in the oracle integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureWeight {
    None,
    /// `-ϑ·e_h` on the observation side, `+θ·e_h` on the incidence side.
    Axis(Axis),
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights at `GK_NODES[1], [3], [5], [7]`.
const GK_GAUSS: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const ORACLE_TOLERANCE: f64 = 1e-10;
const ORACLE_MAX_PANELS: usize = 200_000;

/// 15-point Kronrod estimate and its difference from the embedded 7-point Gauss rule.
fn gauss_kronrod(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * GK_KRONROD[7];
    let mut gauss = fc * GK_GAUSS[3];
    for j in 0..7 {
        let dx = half * GK_NODES[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * GK_KRONROD[j];
        if j % 2 == 1 {
            gauss += pair * GK_GAUSS[j / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]` to absolute error `tol`.
fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, initial_panels: usize, tol: f64) -> Result<Complex64> {
    let length = b - a;
    let step = length / initial_panels as f64;
    let mut stack: Vec<(f64, f64)> = (0..initial_panels)
        .map(|i| (a + i as f64 * step, if i + 1 == initial_panels { b } else { a + (i + 1) as f64 * step }))
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut panels = 0usize;
    while let Some((lo, hi)) = stack.pop() {
        panels += 1;
        if panels > ORACLE_MAX_PANELS {
            return Err(MusicError::Numerical(format!(
                "quadrature oracle exceeded {ORACLE_MAX_PANELS} panels without reaching {tol:e}"
            )));
        }
        let (value, err) = gauss_kronrod(&f, lo, hi);
        let local_tol = 0.5 * tol * (hi - lo) / length;
        let mid = 0.5 * (lo + hi);
        if err <= local_tol || mid <= lo || mid >= hi {
            total += value;
            error += err;
        } else {
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
    }
    if !(error < tol) {
        return Err(MusicError::Numerical(format!("quadrature oracle error estimate {error:e} exceeds {tol:e}")));
    }
    Ok(total)
}

/// `(1/Δ) ∫ w e^{∓ik ϑ·d} dϑ` over the arc by adaptive quadrature (absolute
/// error below 1e-10). The minus sign applies on the observation side.
pub fn quadrature_oracle(d: Vec2, arc: &ApertureArc, side: TestSide, weight: QuadratureWeight, k: f64) -> Result<Complex64> {
    check_inputs(d, arc, k)?;
    let width = arc.width();
    let (phase_sign, weight_sign) = match side {
        TestSide::Observation => (-1.0, -1.0),
        TestSide::Incidence => (1.0, 1.0),
    };
    let f = |t: f64| {
        let dir = Vec2::from_angle(t);
        let w = match weight {
            QuadratureWeight::None => 1.0,
            QuadratureWeight::Axis(h) => weight_sign * dir.axis(h),
        };
        Complex64::from_polar(w, phase_sign * k * dir.dot(d))
    };
    // about one panel per radian of phase change
    let panels = ((k * d.norm() * width).ceil() as usize).clamp(1, 10_000);
    Ok(integrate(f, arc.start, arc.end, panels, ORACLE_TOLERANCE * width)? / width)
}
