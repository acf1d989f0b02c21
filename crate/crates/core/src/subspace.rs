//! MSR matrix, SVD and the signal/noise subspace split.
//!
//! With limited aperture the MSR matrix is not symmetric, so the left and
//! right singular spaces differ. Observation-side test vectors live in the
//! column space of `K` (spanned by the left singular vectors `U`); incidence-side
//! test vectors live in the column space of `Kᵀ`, which is spanned by the
//! complex conjugates of the right singular vectors. The decomposition stores
//! `conj(V)` for that reason.

use crate::error::{MusicError, Result};
use crate::forward::{add_noise, empirical_snr_db, farfield_matrix, ContrastMode, ForwardKind};
use crate::scene::{ArcPair, ApertureArc, Scene};
use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative reconstruction error tolerated from the SVD.
const RECONSTRUCTION_TOLERANCE: f64 = 1e-12;
/// Convergence thresholds of the implicit-shift iteration, tried in order.
/// On rank-deficient input a given threshold can converge to a wrong
/// factorisation without reporting it; another threshold, or the transpose,
/// then succeeds. Every attempt is checked before it is accepted.
const SVD_ATTEMPTS: [(f64, bool); 6] = [
    (5.0 * f64::EPSILON, false),
    (5.0 * f64::EPSILON, true),
    (f64::EPSILON, false),
    (f64::EPSILON, true),
    (1e-14, false),
    (1e-14, true),
];
const SVD_MAX_ITERATIONS: usize = 100_000;

/// Seeded additive noise at a global SNR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseReport {
    pub requested_snr_db: f64,
    pub achieved_snr_db: f64,
    pub seed: u64,
}

/// Far-field data with the acquisition geometry that produced it.
/// Rows follow the observation arc, columns the incidence arc.
#[derive(Clone, Debug, PartialEq)]
pub struct MsrMatrix {
    entries: DMatrix<Complex64>,
    arcs: ArcPair,
    mode: ContrastMode,
    noise: Option<NoiseReport>,
}

impl MsrMatrix {
    pub fn new(entries: DMatrix<Complex64>, arcs: ArcPair, mode: ContrastMode) -> Result<Self> {
        if entries.nrows() != arcs.observation.count || entries.ncols() != arcs.incidence.count {
            return Err(MusicError::Dimension(format!(
                "MSR matrix is {}×{} but the arcs have {} observation and {} incidence directions",
                entries.nrows(),
                entries.ncols(),
                arcs.observation.count,
                arcs.incidence.count
            )));
        }
        if entries.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(MusicError::Numerical("MSR matrix has non-finite entries".into()));
        }
        Ok(MsrMatrix { entries, arcs, mode, noise: None })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn arcs(&self) -> ArcPair {
        self.arcs
    }

    pub fn observation_arc(&self) -> ApertureArc {
        self.arcs.observation
    }

    pub fn incident_arc(&self) -> ApertureArc {
        self.arcs.incidence
    }

    pub fn mode(&self) -> ContrastMode {
        self.mode
    }

    pub fn noise(&self) -> Option<NoiseReport> {
        self.noise
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }
}

/// Synthesises the MSR matrix for `scene`, optionally with noise.
pub fn assemble_msr(
    scene: &Scene,
    arcs: ArcPair,
    mode: ContrastMode,
    kind: ForwardKind,
    noise: Option<NoiseSpec>,
) -> Result<MsrMatrix> {
    arcs.observation.validate()?;
    arcs.incidence.validate()?;
    mode.check_strict(scene)?;
    let rank = mode.expected_rank(scene.len());
    for (label, arc) in [("observation", arcs.observation), ("incidence", arcs.incidence)] {
        if arc.count <= rank {
            return Err(MusicError::Config(format!(
                "{label} count {} must exceed {rank} for {} inhomogeneities in {mode:?} mode",
                arc.count,
                scene.len()
            )));
        }
    }
    let clean = farfield_matrix(scene, mode, kind, &arcs.observation.directions(), &arcs.incidence.directions())?;
    let mut msr = MsrMatrix::new(clean, arcs, mode)?;
    if let Some(spec) = noise {
        if spec.snr_db != f64::INFINITY {
            let noisy = add_noise(&msr.entries, spec.snr_db, spec.seed)?;
            msr.noise = Some(NoiseReport {
                requested_snr_db: spec.snr_db,
                achieved_snr_db: empirical_snr_db(&msr.entries, &noisy),
                seed: spec.seed,
            });
            msr.entries = noisy;
        }
    }
    Ok(msr)
}

/// Thin SVD `K = U Σ V*` with singular values in descending order.
#[derive(Clone, Debug)]
pub struct FullSvd {
    pub u: DMatrix<Complex64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<Complex64>,
}

impl FullSvd {
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let sigma = DMatrix::from_diagonal(&DVector::from_iterator(
            self.singular_values.len(),
            self.singular_values.iter().map(|&s| Complex64::new(s, 0.0)),
        ));
        &self.u * sigma * &self.v_t
    }
}

/// SVD of a complex matrix, accepted only if it reconstructs the input and
/// its singular vectors are orthonormal.
pub fn svd(matrix: &DMatrix<Complex64>) -> Result<FullSvd> {
    if matrix.is_empty() {
        return Err(MusicError::Dimension("cannot decompose an empty matrix".into()));
    }
    let mut worst = 0.0f64;
    for (eps, transpose) in SVD_ATTEMPTS {
        match svd_attempt(matrix, eps, transpose) {
            Some((out, err)) if err < RECONSTRUCTION_TOLERANCE => return Ok(out),
            Some((_, err)) => worst = worst.max(err),
            None => {}
        }
    }
    Err(MusicError::Numerical(format!("SVD failed every attempt (best reconstruction error {worst:.3e})")))
}

/// One factorisation and its error: the larger of the relative
/// reconstruction error and the departure of `U`, `V` from orthonormality.
fn svd_attempt(matrix: &DMatrix<Complex64>, eps: f64, transpose: bool) -> Option<(FullSvd, f64)> {
    let input = if transpose { matrix.transpose() } else { matrix.clone() };
    let d = SVD::try_new(input, true, true, eps, SVD_MAX_ITERATIONS)?;
    let (u, v_t) = (d.u?, d.v_t?);
    let singular_values: Vec<f64> = d.singular_values.iter().copied().collect();
    // Kᵀ = A Σ B* gives K = conj(B) Σ Aᵀ
    let out = if transpose {
        FullSvd { u: v_t.transpose(), singular_values, v_t: u.transpose() }
    } else {
        FullSvd { u, singular_values, v_t }
    };
    if out.singular_values.windows(2).any(|w| w[0] < w[1]) {
        return None;
    }
    let scale = matrix.norm();
    let recon = if scale > 0.0 { (out.reconstruct() - matrix).norm() / scale } else { 0.0 };
    let r = out.singular_values.len();
    let eye = DMatrix::<Complex64>::identity(r, r);
    let ortho_u = (out.u.adjoint() * &out.u - &eye).norm();
    let ortho_v = (&out.v_t * out.v_t.adjoint() - &eye).norm();
    let err = recon.max(ortho_u).max(ortho_v);
    err.is_finite().then_some((out, err))
}

pub fn compute_svd(msr: &MsrMatrix) -> Result<FullSvd> {
    svd(&msr.entries)
}

/// How many singular vectors span the signal subspace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SelectionRule {
    /// Keep `σ_j / σ_1 ≥ tau`.
    Threshold { tau: f64 },
    /// Keep exactly `dim`, clamped to `[1, min(M, N) - 1]`.
    Fixed { dim: usize },
    /// Cut at the largest drop of `log σ` among the first `min(M, N) / 2` values.
    LargestLogGap,
}

impl SelectionRule {
    pub const NOISY_DEFAULT: SelectionRule = SelectionRule::Threshold { tau: 1e-2 };
    pub const NOISELESS_DEFAULT: SelectionRule = SelectionRule::Threshold { tau: 1e-8 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            SelectionRule::Threshold { tau } if !(tau > 0.0 && tau <= 1.0) => Err(MusicError::Config(format!(
                "selection.tau = {tau} must lie in (0, 1]"
            ))),
            SelectionRule::Fixed { dim: 0 } => Err(MusicError::Config("selection.dim must be ≥ 1".into())),
            _ => Ok(()),
        }
    }
}

/// Selected dimension and, if it had to be clamped, the unclamped value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignalDim {
    pub dim: usize,
    pub clamped_from: Option<usize>,
}

pub fn select_signal_dim(singular_values: &[f64], rule: SelectionRule) -> Result<SignalDim> {
    rule.validate()?;
    let len = singular_values.len();
    if len < 2 {
        return Err(MusicError::Dimension(format!(
            "need at least 2 singular values to split signal and noise, got {len}"
        )));
    }
    let sigma1 = singular_values[0];
    if !(sigma1 > 0.0) {
        return Err(MusicError::Numerical("all singular values are zero".into()));
    }
    let raw = match rule {
        SelectionRule::Threshold { tau } => singular_values.iter().filter(|&&s| s / sigma1 >= tau).count(),
        SelectionRule::Fixed { dim } => dim,
        SelectionRule::LargestLogGap => {
            let floor = |s: f64| s.max(f64::MIN_POSITIVE).ln();
            let last = (len / 2).max(1).min(len - 1);
            let mut best = 1;
            let mut best_gap = f64::NEG_INFINITY;
            for j in 1..=last {
                let gap = floor(singular_values[j - 1]) - floor(singular_values[j]);
                if gap > best_gap {
                    best_gap = gap;
                    best = j;
                }
            }
            best
        }
    };
    let dim = raw.clamp(1, len - 1);
    Ok(SignalDim { dim, clamped_from: (dim != raw).then_some(raw) })
}

/// Signal bases of an MSR matrix.
#[derive(Clone, Debug)]
pub struct SubspaceDecomposition {
    pub singular_values: Vec<f64>,
    pub signal_dim: usize,
    /// `M × d`, orthonormal columns spanning the observation-side signal space.
    pub left_signal: DMatrix<Complex64>,
    /// `N × d`, orthonormal columns spanning the incidence-side signal space.
    pub right_signal: DMatrix<Complex64>,
    pub rule: SelectionRule,
    pub clamped_from: Option<usize>,
}

impl SubspaceDecomposition {
    pub fn from_svd(svd: &FullSvd, rule: SelectionRule) -> Result<Self> {
        let sel = select_signal_dim(&svd.singular_values, rule)?;
        let d = sel.dim;
        Ok(SubspaceDecomposition {
            singular_values: svd.singular_values.clone(),
            signal_dim: d,
            left_signal: svd.u.columns(0, d).into_owned(),
            right_signal: svd.v_t.rows(0, d).transpose(),
            rule,
            clamped_from: sel.clamped_from,
        })
    }

    pub fn observation_len(&self) -> usize {
        self.left_signal.nrows()
    }

    pub fn incidence_len(&self) -> usize {
        self.right_signal.nrows()
    }
}

/// SVD followed by signal-dimension selection.
pub fn decompose(msr: &MsrMatrix, rule: SelectionRule) -> Result<SubspaceDecomposition> {
    SubspaceDecomposition::from_svd(&compute_svd(msr)?, rule)
}

/// `v - Σ_j ⟨v, b_j⟩ b_j` for orthonormal columns `b_j`.
pub fn project_noise(basis: &DMatrix<Complex64>, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    if basis.nrows() != v.len() {
        return Err(MusicError::Dimension(format!(
            "basis has {} rows but the vector has {} entries",
            basis.nrows(),
            v.len()
        )));
    }
    let coefficients = basis.ad_mul(v);
    Ok(v - basis * coefficients)
}

/// `‖v - Σ_j ⟨v, b_j⟩ b_j‖`, without allocating a checked result.
pub(crate) fn noise_norm(basis: &DMatrix<Complex64>, v: &DVector<Complex64>) -> f64 {
    let coefficients = basis.ad_mul(v);
    (v - basis * coefficients).norm()
}
