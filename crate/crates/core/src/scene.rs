//! Physical configuration and aperture geometry.

use crate::error::{MusicError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

/// Default margin κ in the separation check `|r_s - r_s'| > κ · 3/(4k)`.
pub const DEFAULT_SEPARATION_MARGIN: f64 = 5.0;

/// A point or direction in the plane. Serialised as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };
    pub const E1: Vec2 = Vec2 { x: 1.0, y: 0.0 };
    pub const E2: Vec2 = Vec2 { x: 0.0, y: 1.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `t`.
    pub fn from_angle(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Component along axis 1 or 2.
    pub fn axis(self, h: Axis) -> f64 {
        match h {
            Axis::One => self.x,
            Axis::Two => self.y,
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2 { x: a[0], y: a[1] }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

/// Cartesian axis index `h ∈ {1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    One,
    Two,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::One, Axis::Two];

    pub fn unit(self) -> Vec2 {
        match self {
            Axis::One => Vec2::E1,
            Axis::Two => Vec2::E2,
        }
    }
}

/// Magnitude and angle; the angle lies in `[-π, π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarVector {
    pub magnitude: f64,
    pub angle: f64,
}

/// Polar form of `v`. Vectors shorter than `1e-12` get angle 0.
pub fn to_polar(v: Vec2) -> PolarVector {
    let magnitude = v.norm();
    if magnitude < 1e-12 {
        return PolarVector { magnitude, angle: 0.0 };
    }
    let mut angle = v.y.atan2(v.x);
    if angle >= PI {
        angle -= TAU;
    }
    PolarVector { magnitude, angle }
}

/// Background medium constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Background {
    pub eps: f64,
    pub mu: f64,
}

impl Background {
    pub fn new(eps: f64, mu: f64) -> Result<Self> {
        let b = Background { eps, mu };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(MusicError::Config(format!("background.eps = {} must be > 0", self.eps)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(MusicError::Config(format!("background.mu = {} must be > 0", self.mu)));
        }
        Ok(())
    }
}

impl Default for Background {
    fn default() -> Self {
        Background { eps: 1.0, mu: 1.0 }
    }
}

/// A small disk `r_s + α B` with constant material parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inhomogeneity {
    pub center: Vec2,
    pub radius: f64,
    pub eps: f64,
    pub mu: f64,
}

/// Inhomogeneities sharing one radius, in a background, at wavenumber `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    background: Background,
    inhomogeneities: Vec<Inhomogeneity>,
    wavenumber: f64,
}

impl Scene {
    pub fn new(background: Background, inhomogeneities: Vec<Inhomogeneity>, wavenumber: f64) -> Result<Self> {
        background.validate()?;
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return Err(MusicError::Config(format!("wavenumber {wavenumber} must be > 0")));
        }
        let first = inhomogeneities
            .first()
            .ok_or_else(|| MusicError::Config("scene needs at least one inhomogeneity".into()))?;
        for (s, inh) in inhomogeneities.iter().enumerate() {
            if !(inh.radius > 0.0 && inh.radius.is_finite()) {
                return Err(MusicError::Config(format!(
                    "inhomogeneities[{s}].radius = {} must be > 0",
                    inh.radius
                )));
            }
            if inh.radius != first.radius {
                return Err(MusicError::Config(format!(
                    "inhomogeneities[{s}].radius = {} differs from {}; all radii must be equal",
                    inh.radius, first.radius
                )));
            }
            if !inh.center.is_finite() || !inh.eps.is_finite() || !inh.mu.is_finite() {
                return Err(MusicError::Config(format!("inhomogeneities[{s}] has non-finite fields")));
            }
            if !(inh.eps > 0.0 && inh.mu > 0.0) {
                return Err(MusicError::Config(format!(
                    "inhomogeneities[{s}]: eps and mu must be > 0"
                )));
            }
        }
        Ok(Scene { background, inhomogeneities, wavenumber })
    }

    /// Builds the scene from a wavelength, `k = 2π / λ`.
    pub fn with_wavelength(
        background: Background,
        inhomogeneities: Vec<Inhomogeneity>,
        wavelength: f64,
    ) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(MusicError::Config(format!("wavelength {wavelength} must be > 0")));
        }
        Scene::new(background, inhomogeneities, TAU / wavelength)
    }

    pub fn background(&self) -> Background {
        self.background
    }

    pub fn inhomogeneities(&self) -> &[Inhomogeneity] {
        &self.inhomogeneities
    }

    pub fn len(&self) -> usize {
        self.inhomogeneities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inhomogeneities.is_empty()
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn wavelength(&self) -> f64 {
        TAU / self.wavenumber
    }

    /// Common radius α.
    pub fn radius(&self) -> f64 {
        self.inhomogeneities[0].radius
    }

    pub fn centers(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.inhomogeneities.iter().map(|i| i.center)
    }

    /// Same scene with every center shifted by `offset`.
    pub fn translated(&self, offset: Vec2) -> Scene {
        let mut out = self.clone();
        for inh in &mut out.inhomogeneities {
            inh.center = inh.center + offset;
        }
        out
    }

    /// Same scene with the inhomogeneities listed in `order`.
    pub fn permuted(&self, order: &[usize]) -> Result<Scene> {
        let mut seen = vec![false; self.len()];
        if order.len() != self.len() || order.iter().any(|&i| i >= self.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(MusicError::Dimension(format!(
                "{order:?} is not a permutation of 0..{}",
                self.len()
            )));
        }
        let list = order.iter().map(|&i| self.inhomogeneities[i]).collect();
        Ok(Scene { inhomogeneities: list, ..self.clone() })
    }
}

/// Contiguous angular range `[start, end]` sampled at `count` equally spaced
/// angles, both endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureArc {
    pub start: f64,
    pub end: f64,
    #[serde(default = "default_arc_count")]
    pub count: usize,
}

/// Directions per arc when a configuration leaves the count out.
pub const DEFAULT_ARC_COUNT: usize = 32;

fn default_arc_count() -> usize {
    DEFAULT_ARC_COUNT
}

impl ApertureArc {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        let arc = ApertureArc { start, end, count };
        arc.validate()?;
        Ok(arc)
    }

    /// Arc of the given width centred at `center`.
    pub fn centered(center: f64, width: f64, count: usize) -> Result<Self> {
        ApertureArc::new(center - 0.5 * width, center + 0.5 * width, count)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(MusicError::Config(format!(
                "arc count = {} violates count ≥ 2",
                self.count
            )));
        }
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(MusicError::Config("arc angles must be finite".into()));
        }
        if self.end <= self.start {
            return Err(MusicError::Config(format!(
                "arc end {} must exceed start {}",
                self.end, self.start
            )));
        }
        // one ulp of slack so that a literal [0, 2π] passes
        if self.width() > TAU * (1.0 + f64::EPSILON) {
            return Err(MusicError::Config(format!(
                "arc width {} exceeds 2π",
                self.width()
            )));
        }
        Ok(())
    }

    /// `end - start`.
    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    /// `end + start`.
    pub fn angle_sum(&self) -> f64 {
        self.end + self.start
    }

    pub fn angles(&self) -> Vec<f64> {
        let step = self.width() / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.end } else { self.start + i as f64 * step })
            .collect()
    }

    pub fn directions(&self) -> Vec<Vec2> {
        self.angles().into_iter().map(Vec2::from_angle).collect()
    }

    /// Normaliser `Δ/2 + ½ cos(Σ) sin(Δ)` of the direction-weighted test vectors.
    pub fn weighted_normalizer(&self) -> f64 {
        0.5 * self.width() + 0.5 * self.angle_sum().cos() * self.width().sin()
    }
}

/// Observation and incidence arcs of one acquisition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcPair {
    pub observation: ApertureArc,
    pub incidence: ApertureArc,
}

impl ArcPair {
    pub fn new(observation: ApertureArc, incidence: ApertureArc) -> Result<Self> {
        observation.validate()?;
        incidence.validate()?;
        Ok(ArcPair { observation, incidence })
    }
}

/// Unit directions of `arc`; errors when the arc is invalid.
pub fn directions(arc: &ApertureArc) -> Result<Vec<Vec2>> {
    arc.validate()?;
    Ok(arc.directions())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// Centers closer than `κ · 3/(4k)`.
    TooClose,
    /// Disks overlap or touch.
    Overlap,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationViolation {
    pub first: usize,
    pub second: usize,
    pub distance: f64,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub threshold: f64,
    pub min_distance: Option<f64>,
    pub violations: Vec<SeparationViolation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Converts a failing report into a configuration error.
    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            return Ok(());
        }
        let pairs: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("({}, {}) at distance {:.6} [{:?}]", v.first, v.second, v.distance, v.kind))
            .collect();
        Err(MusicError::Config(format!(
            "scene separation check failed (threshold {:.6}): {}",
            self.threshold,
            pairs.join(", ")
        )))
    }
}

/// Pairwise separation check with margin `margin`.
pub fn validate_scene(scene: &Scene, margin: f64) -> ValidationReport {
    let threshold = margin * 3.0 / (4.0 * scene.wavenumber());
    let two_alpha = 2.0 * scene.radius();
    let list = scene.inhomogeneities();
    let mut violations = Vec::new();
    let mut min_distance: Option<f64> = None;
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            let distance = list[i].center.distance(list[j].center);
            min_distance = Some(min_distance.map_or(distance, |m| m.min(distance)));
            if !(distance > threshold) {
                violations.push(SeparationViolation { first: i, second: j, distance, kind: ViolationKind::TooClose });
            }
            if !(distance > two_alpha) {
                violations.push(SeparationViolation { first: i, second: j, distance, kind: ViolationKind::Overlap });
            }
        }
    }
    ValidationReport { threshold, min_distance, violations }
}
