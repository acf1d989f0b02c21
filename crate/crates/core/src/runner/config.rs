//! JSON experiment configuration.

use crate::analytic::SeriesTruncation;
use crate::error::{MusicError, Result};
use crate::forward::{ContrastMode, ForwardKind};
use crate::imaging::{Grid, TestKind, DEFAULT_FLOOR};
use crate::scene::{validate_scene, ApertureArc, ArcPair, Background, Inhomogeneity, Scene, Vec2, DEFAULT_SEPARATION_MARGIN};
use crate::subspace::{NoiseSpec, SelectionRule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_WAVELENGTH: f64 = 0.4;
pub const DEFAULT_RADIUS: f64 = 0.1;
pub const DEFAULT_SNR_DB: f64 = 20.0;
pub const DEFAULT_SEED: u64 = 1;

/// One disk; missing material values default to the background.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InhomogeneitySpec {
    pub center: Vec2,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default)]
    pub background: Background,
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    /// Shared by every inhomogeneity.
    #[serde(default = "default_radius")]
    pub radius: f64,
    pub inhomogeneities: Vec<InhomogeneitySpec>,
    #[serde(default = "default_margin")]
    pub separation_margin: f64,
}

fn default_wavelength() -> f64 {
    DEFAULT_WAVELENGTH
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

fn default_margin() -> f64 {
    DEFAULT_SEPARATION_MARGIN
}

impl SceneSpec {
    pub fn build(&self) -> Result<Scene> {
        let bg = self.background;
        let list = self
            .inhomogeneities
            .iter()
            .map(|s| Inhomogeneity {
                center: s.center,
                radius: self.radius,
                eps: s.eps.unwrap_or(bg.eps),
                mu: s.mu.unwrap_or(bg.mu),
            })
            .collect();
        Scene::with_wavelength(bg, list, self.wavelength)
    }
}

/// Files an experiment can emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    SingularValues,
    MapCsv,
    MapPgm,
    Peaks,
    Metadata,
}

impl OutputKind {
    pub const ALL: [OutputKind; 5] =
        [OutputKind::SingularValues, OutputKind::MapCsv, OutputKind::MapPgm, OutputKind::Peaks, OutputKind::Metadata];

    pub fn file_name(self) -> &'static str {
        match self {
            OutputKind::SingularValues => "singular_values.csv",
            OutputKind::MapCsv => "map.csv",
            OutputKind::MapPgm => "map.pgm",
            OutputKind::Peaks => "peaks.csv",
            OutputKind::Metadata => "metadata.json",
        }
    }
}

pub const ANALYTIC_FILE: &str = "analytic_comparison.csv";

/// Full description of one experiment. `snr_db = null` means noiseless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scene: SceneSpec,
    pub incident_arc: ApertureArc,
    pub observation_arc: ApertureArc,
    pub mode: ContrastMode,
    #[serde(default)]
    pub forward: ForwardKind,
    #[serde(default = "default_snr")]
    pub snr_db: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Left out: `τ = 1e-2` with noise, `1e-8` without.
    #[serde(default)]
    pub selection: Option<SelectionRule>,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub test_vectors: TestKind,
    #[serde(default)]
    pub truncation: SeriesTruncation,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub analytic_check: bool,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_snr() -> Option<f64> {
    Some(DEFAULT_SNR_DB)
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_outputs() -> Vec<OutputKind> {
    OutputKind::ALL.to_vec()
}

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

impl ExperimentConfig {
    /// A configuration with every optional field at its default.
    pub fn new(scene: SceneSpec, incident_arc: ApertureArc, observation_arc: ApertureArc, mode: ContrastMode) -> Self {
        ExperimentConfig {
            scene,
            incident_arc,
            observation_arc,
            mode,
            forward: ForwardKind::default(),
            snr_db: default_snr(),
            seed: DEFAULT_SEED,
            selection: None,
            grid: Grid::default(),
            test_vectors: TestKind::default(),
            truncation: SeriesTruncation::default(),
            outputs: default_outputs(),
            analytic_check: false,
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn arcs(&self) -> ArcPair {
        ArcPair { observation: self.observation_arc, incidence: self.incident_arc }
    }

    pub fn noise(&self) -> Option<NoiseSpec> {
        match self.snr_db {
            Some(snr_db) if snr_db != f64::INFINITY => Some(NoiseSpec { snr_db, seed: self.seed }),
            _ => None,
        }
    }

    /// The rule in force, resolving an absent one from the noise setting.
    pub fn selection_rule(&self) -> SelectionRule {
        self.selection.unwrap_or(if self.noise().is_some() {
            SelectionRule::NOISY_DEFAULT
        } else {
            SelectionRule::NOISELESS_DEFAULT
        })
    }

    /// Fills every defaulted field with its concrete value.
    pub fn resolved(mut self) -> Self {
        self.selection = Some(self.selection_rule());
        let bg = self.scene.background;
        for s in &mut self.scene.inhomogeneities {
            s.eps.get_or_insert(bg.eps);
            s.mu.get_or_insert(bg.mu);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, arc) in [("incident_arc", &self.incident_arc), ("observation_arc", &self.observation_arc)] {
            arc.validate().map_err(|e| MusicError::Config(format!("{name}: {}", strip_kind(&e))))?;
        }
        let scene = self.scene.build()?;
        validate_scene(&scene, self.scene.separation_margin).into_result()?;
        self.mode.check_strict(&scene)?;
        if let Some(snr) = self.snr_db {
            if snr.is_nan() || snr == f64::NEG_INFINITY {
                return Err(MusicError::Config(format!("snr_db = {snr} must be a number or null")));
            }
        }
        self.selection_rule().validate()?;
        self.grid.validate()?;
        self.truncation.validate()?;
        if let TestKind::Mu { xi_obs, xi_inc } = self.test_vectors {
            if xi_obs.norm() == 0.0 || xi_inc.norm() == 0.0 || !xi_obs.is_finite() || !xi_inc.is_finite() {
                return Err(MusicError::Config("test_vectors.xi_obs and xi_inc must be finite and non-zero".into()));
            }
        }
        if !(self.floor > 0.0 && self.floor.is_finite()) {
            return Err(MusicError::Config(format!("floor = {} must be > 0", self.floor)));
        }
        if self.outputs.is_empty() && !self.analytic_check {
            return Err(MusicError::Config("outputs must name at least one file".into()));
        }
        Ok(())
    }

    /// Pretty JSON with every default written out; parsing it back gives the
    /// same configuration and the same text.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the resolved configuration's JSON, lowercase hex.
    pub fn hash(&self) -> Result<String> {
        let text = self.clone().resolved().to_json()?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }
}

fn strip_kind(e: &MusicError) -> String {
    match e {
        MusicError::Config(m) | MusicError::Domain(m) | MusicError::Dimension(m) | MusicError::Numerical(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Parses, fills defaults and validates.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| MusicError::Config(format!("config: {e}")))?;
    let config = config.resolved();
    config.validate()?;
    Ok(config)
}
