//! Test vectors and the dual-projection MUSIC imaging function.

use crate::error::{MusicError, Result};
use crate::forward::ContrastMode;
use crate::scene::{ApertureArc, ArcPair, Vec2};
use crate::subspace::{noise_norm, SelectionRule, SubspaceDecomposition};
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_FLOOR: f64 = 1e-8;
pub const DEFAULT_CAP: f64 = 1e8;
/// Weighted test vectors are rejected below this normaliser.
pub const DEGENERATE_NORMALIZER: f64 = 1e-8;

/// Which side of the MSR matrix a test vector probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestSide {
    /// Rows of `K`, tested against the left signal basis.
    Observation,
    /// Columns of `K`, tested against the right signal basis.
    Incidence,
}

/// Plane-wave test vectors, or direction-weighted ones with weights `ξ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestKind {
    #[default]
    Eps,
    Mu { xi_obs: Vec2, xi_inc: Vec2 },
}

/// Region-of-interest grid `[x0, x1] × [y0, y1]` with uniform spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub step: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { x: [-1.0, 1.0], y: [-1.0, 1.0], step: 0.02 }
    }
}

fn axis_len(range: [f64; 2], step: f64) -> usize {
    // tolerate representation error in (hi - lo) / step
    ((range[1] - range[0]) / step + 1e-9).floor() as usize + 1
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(MusicError::Config(format!("grid.step = {} must be > 0", self.step)));
        }
        for (name, r) in [("x", self.x), ("y", self.y)] {
            if !(r[0].is_finite() && r[1].is_finite()) || r[1] < r[0] {
                return Err(MusicError::Config(format!("grid.{name} = {r:?} must be a finite increasing range")));
            }
            if axis_len(r, self.step) < 2 {
                return Err(MusicError::Config(format!(
                    "grid.{name} = {r:?} with step {} has fewer than 2 points",
                    self.step
                )));
            }
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        axis_len(self.x, self.step)
    }

    pub fn ny(&self) -> usize {
        axis_len(self.y, self.step)
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x[0] + i as f64 * self.step
    }

    pub fn y_at(&self, j: usize) -> f64 {
        self.y[0] + j as f64 * self.step
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.x_at(i), self.y_at(j))
    }

    /// Indices of the node closest to `p`, clamped to the grid.
    pub fn nearest(&self, p: Vec2) -> (usize, usize) {
        let clamp = |t: f64, n: usize| (t.round().max(0.0) as usize).min(n - 1);
        (clamp((p.x - self.x[0]) / self.step, self.nx()), clamp((p.y - self.y[0]) / self.step, self.ny()))
    }

    pub fn translated(&self, offset: Vec2) -> Grid {
        Grid { x: [self.x[0] + offset.x, self.x[1] + offset.x], y: [self.y[0] + offset.y, self.y[1] + offset.y], step: self.step }
    }
}

/// `(1/√M) [e^{-ikϑ_m·r}]` on the observation side, `(1/√N) [e^{ikθ_n·r}]` on
/// the incidence side. Unit norm by construction.
pub fn test_vector_eps(r: Vec2, arc: &ApertureArc, side: TestSide, k: f64) -> DVector<Complex64> {
    let dirs = arc.directions();
    plane_wave_vector(r, &dirs, side, k)
}

fn plane_wave_vector(r: Vec2, dirs: &[Vec2], side: TestSide, k: f64) -> DVector<Complex64> {
    let sign = match side {
        TestSide::Observation => -1.0,
        TestSide::Incidence => 1.0,
    };
    let scale = 1.0 / (dirs.len() as f64).sqrt();
    DVector::from_iterator(dirs.len(), dirs.iter().map(|d| Complex64::from_polar(scale, sign * k * d.dot(r))))
}

/// `(1/√C) [(-ϑ_m·ξ) e^{-ikϑ_m·r}]` on the observation side and
/// `(1/√C) [(θ_n·ξ) e^{ikθ_n·r}]` on the incidence side, with
/// `C = Δ/2 + ½ cos(Σ) sin(Δ)` of the arc.
pub fn test_vector_mu(r: Vec2, arc: &ApertureArc, side: TestSide, k: f64, xi: Vec2) -> Result<DVector<Complex64>> {
    let c = checked_normalizer(arc)?;
    if xi.norm() == 0.0 || !xi.is_finite() {
        return Err(MusicError::Domain("weight vector ξ must be finite and non-zero".into()));
    }
    Ok(weighted_vector(r, &arc.directions(), side, k, xi, c))
}

fn checked_normalizer(arc: &ApertureArc) -> Result<f64> {
    arc.validate()?;
    let c = arc.weighted_normalizer();
    if c.abs() < DEGENERATE_NORMALIZER {
        return Err(MusicError::Domain(format!(
            "aperture [{}, {}] is degenerate for weighted test vectors (normaliser {c:.3e})",
            arc.start, arc.end
        )));
    }
    Ok(c)
}

fn weighted_vector(r: Vec2, dirs: &[Vec2], side: TestSide, k: f64, xi: Vec2, c: f64) -> DVector<Complex64> {
    let (weight_sign, phase_sign) = match side {
        TestSide::Observation => (-1.0, -1.0),
        TestSide::Incidence => (1.0, 1.0),
    };
    let scale = 1.0 / c.abs().sqrt();
    DVector::from_iterator(
        dirs.len(),
        dirs.iter().map(|d| Complex64::from_polar(scale * weight_sign * d.dot(xi), phase_sign * k * d.dot(r))),
    )
}

/// Everything the imaging function needs besides the decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImagingSetup {
    pub arcs: ArcPair,
    pub mode: ContrastMode,
    pub wavenumber: f64,
    pub test_kind: TestKind,
    pub floor: f64,
    pub cap: f64,
}

impl ImagingSetup {
    pub fn new(arcs: ArcPair, mode: ContrastMode, wavenumber: f64) -> Self {
        ImagingSetup { arcs, mode, wavenumber, test_kind: TestKind::Eps, floor: DEFAULT_FLOOR, cap: DEFAULT_CAP }
    }

    pub fn with_test_kind(self, test_kind: TestKind) -> Self {
        ImagingSetup { test_kind, ..self }
    }
}

/// Precomputed directions and normalisers for repeated evaluation.
struct Evaluator<'a> {
    decomposition: &'a SubspaceDecomposition,
    setup: ImagingSetup,
    observation: Vec<Vec2>,
    incidence: Vec<Vec2>,
    normalizers: Option<(f64, f64)>,
}

impl<'a> Evaluator<'a> {
    fn new(decomposition: &'a SubspaceDecomposition, setup: ImagingSetup) -> Result<Self> {
        let arcs = setup.arcs;
        if decomposition.observation_len() != arcs.observation.count || decomposition.incidence_len() != arcs.incidence.count {
            return Err(MusicError::Dimension(format!(
                "decomposition bases have {} and {} rows but the arcs have {} and {} directions",
                decomposition.observation_len(),
                decomposition.incidence_len(),
                arcs.observation.count,
                arcs.incidence.count
            )));
        }
        if !(setup.floor > 0.0) || !(setup.cap > 0.0) {
            return Err(MusicError::Config("imaging floor and cap must be > 0".into()));
        }
        let normalizers = match setup.test_kind {
            TestKind::Eps => None,
            TestKind::Mu { xi_obs, xi_inc } => {
                if xi_obs.norm() == 0.0 || xi_inc.norm() == 0.0 {
                    return Err(MusicError::Domain("weight vectors ξ must be non-zero".into()));
                }
                Some((checked_normalizer(&arcs.observation)?, checked_normalizer(&arcs.incidence)?))
            }
        };
        Ok(Evaluator {
            decomposition,
            setup,
            observation: arcs.observation.directions(),
            incidence: arcs.incidence.directions(),
            normalizers,
        })
    }

    fn test_vectors(&self, r: Vec2) -> (DVector<Complex64>, DVector<Complex64>) {
        let k = self.setup.wavenumber;
        match (self.setup.test_kind, self.normalizers) {
            (TestKind::Mu { xi_obs, xi_inc }, Some((c1, c2))) => (
                weighted_vector(r, &self.observation, TestSide::Observation, k, xi_obs, c1),
                weighted_vector(r, &self.incidence, TestSide::Incidence, k, xi_inc, c2),
            ),
            _ => (
                plane_wave_vector(r, &self.observation, TestSide::Observation, k),
                plane_wave_vector(r, &self.incidence, TestSide::Incidence, k),
            ),
        }
    }

    fn projected_norms(&self, r: Vec2) -> (f64, f64) {
        let (f, g) = self.test_vectors(r);
        (noise_norm(&self.decomposition.left_signal, &f), noise_norm(&self.decomposition.right_signal, &g))
    }

    fn value(&self, r: Vec2) -> f64 {
        let (p, q) = self.projected_norms(r);
        let floor = self.setup.floor;
        let v = 0.5 * (1.0 / p.max(floor) + 1.0 / q.max(floor));
        v.min(self.setup.cap)
    }
}

/// `(‖ℙ f(r)‖, ‖ℚ g(r)‖)`: noise-space norms of the observation- and
/// incidence-side test vectors.
pub fn projected_norms(r: Vec2, decomposition: &SubspaceDecomposition, setup: &ImagingSetup) -> Result<(f64, f64)> {
    Ok(Evaluator::new(decomposition, *setup)?.projected_norms(r))
}

/// [`projected_norms`] at every grid node, `y` outer.
pub fn projected_norm_map(grid: &Grid, decomposition: &SubspaceDecomposition, setup: &ImagingSetup) -> Result<Vec<(f64, f64)>> {
    grid.validate()?;
    let eval = Evaluator::new(decomposition, *setup)?;
    let nx = grid.nx();
    let mut out = vec![(0.0, 0.0); nx * grid.ny()];
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = eval.projected_norms(grid.node(i, j));
        }
    });
    Ok(out)
}

/// `½ (1/max(‖ℙf‖, δ) + 1/max(‖ℚg‖, δ))`, capped.
pub fn music_value(r: Vec2, decomposition: &SubspaceDecomposition, setup: &ImagingSetup) -> Result<f64> {
    Ok(Evaluator::new(decomposition, *setup)?.value(r))
}

/// Provenance of a map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapMetadata {
    pub mode: ContrastMode,
    pub arcs: ArcPair,
    pub rule: SelectionRule,
    pub signal_dim: usize,
    pub seed: Option<u64>,
    pub test_kind: TestKind,
    pub floor: f64,
    pub cap: f64,
}

/// Imaging function sampled on a grid; `values[j * nx + i]` is node `(x_i, y_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagingMap {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub metadata: MapMetadata,
}

/// Local maximum of a map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub i: usize,
    pub j: usize,
    pub position: Vec2,
    pub value: f64,
}

impl ImagingMap {
    pub fn nx(&self) -> usize {
        self.grid.nx()
    }

    pub fn ny(&self) -> usize {
        self.grid.ny()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx() + i]
    }

    pub fn median(&self) -> f64 {
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Strict local maxima over eight-neighbourhoods, in grid order.
    ///
    /// A connected flat region (as produced where the map saturates at the
    /// cap) counts as one maximum when every node bordering it is lower; it
    /// is reported at its node nearest the region centroid. Regions touching
    /// the grid edge are skipped.
    pub fn local_maxima(&self) -> Vec<Peak> {
        let (nx, ny) = (self.nx(), self.ny());
        let mut seen = vec![false; nx * ny];
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if seen[j * nx + i] {
                    continue;
                }
                let v = self.at(i, j);
                let mut region = vec![(i, j)];
                let mut stack = vec![(i, j)];
                seen[j * nx + i] = true;
                let mut is_max = true;
                while let Some((ci, cj)) = stack.pop() {
                    if ci == 0 || cj == 0 || ci + 1 == nx || cj + 1 == ny {
                        is_max = false;
                    }
                    for dj in [-1i64, 0, 1] {
                        for di in [-1i64, 0, 1] {
                            let (ni, nj) = (ci as i64 + di, cj as i64 + dj);
                            if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                                continue;
                            }
                            let (ni, nj) = (ni as usize, nj as usize);
                            let n = self.at(ni, nj);
                            if n == v {
                                if !seen[nj * nx + ni] {
                                    seen[nj * nx + ni] = true;
                                    region.push((ni, nj));
                                    stack.push((ni, nj));
                                }
                            } else if !(v > n) {
                                is_max = false;
                            }
                        }
                    }
                }
                if is_max {
                    let count = region.len() as f64;
                    let ci = region.iter().map(|r| r.0 as f64).sum::<f64>() / count;
                    let cj = region.iter().map(|r| r.1 as f64).sum::<f64>() / count;
                    let &(pi, pj) = region
                        .iter()
                        .min_by(|a, b| {
                            let da = (a.0 as f64 - ci).powi(2) + (a.1 as f64 - cj).powi(2);
                            let db = (b.0 as f64 - ci).powi(2) + (b.1 as f64 - cj).powi(2);
                            da.total_cmp(&db)
                        })
                        .expect("region holds its seed");
                    out.push(Peak { i: pi, j: pj, position: self.grid.node(pi, pj), value: v });
                }
            }
        }
        out.sort_by_key(|p| (p.j, p.i));
        out
    }
}

/// Local maxima by descending value, greedily dropping any within
/// `min_separation` of an already accepted peak; at most `limit` are returned.
pub fn find_peaks(map: &ImagingMap, min_separation: f64, limit: Option<usize>) -> Vec<Peak> {
    let mut candidates = map.local_maxima();
    candidates.sort_by(|a, b| b.value.total_cmp(&a.value));
    let mut kept: Vec<Peak> = Vec::new();
    for p in candidates {
        if limit.is_some_and(|l| kept.len() >= l) {
            break;
        }
        if kept.iter().all(|q| q.position.distance(p.position) >= min_separation) {
            kept.push(p);
        }
    }
    kept
}

/// Imaging function over every grid node, evaluated in parallel by row.
pub fn music_map(grid: &Grid, decomposition: &SubspaceDecomposition, setup: &ImagingSetup, seed: Option<u64>) -> Result<ImagingMap> {
    grid.validate()?;
    let eval = Evaluator::new(decomposition, *setup)?;
    let nx = grid.nx();
    let mut values = vec![0.0; nx * grid.ny()];
    values.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = eval.value(grid.node(i, j));
        }
    });
    Ok(ImagingMap {
        grid: *grid,
        values,
        metadata: MapMetadata {
            mode: setup.mode,
            arcs: setup.arcs,
            rule: decomposition.rule,
            signal_dim: decomposition.signal_dim,
            seed,
            test_kind: setup.test_kind,
            floor: setup.floor,
            cap: setup.cap,
        },
    })
}
