//! Experiment orchestration behind the `music` binary.
//!
//! [`run_experiment`] is pure computation; [`write_artifacts`] turns its
//! result into files. Nothing touches the disk until every number exists.

mod cases;
mod config;
mod output;
mod sweep;

pub use cases::{case, case_config, CaseDescriptor, Example, OBSERVATION_WIDTHS, PAPER_CENTERS};
pub use config::{
    parse_config, ExperimentConfig, InhomogeneitySpec, OutputKind, SceneSpec, ANALYTIC_FILE, DEFAULT_RADIUS, DEFAULT_SEED,
    DEFAULT_SNR_DB, DEFAULT_WAVELENGTH,
};
pub use output::{comparison_csv, map_csv, map_pgm, peaks_csv, singular_values_csv, write_artifacts};
pub use sweep::{parse_angle, sweep_aperture, sweep_csv, SweepRow};

use crate::analytic::{structure_eps_with_floor, structure_mu_with_floor};
use crate::error::Result;
use crate::forward::ContrastMode;
use crate::imaging::{find_peaks, music_map, ImagingMap, ImagingSetup, Peak};
use crate::scene::{validate_scene, Vec2};
use crate::subspace::{assemble_msr, decompose, SubspaceDecomposition};
use rayon::prelude::*;
use serde::Serialize;

/// Direct and predicted imaging values at one grid node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonRow {
    pub position: Vec2,
    pub direct: f64,
    pub predicted: f64,
}

impl ComparisonRow {
    pub fn discrepancy(&self) -> f64 {
        (self.direct - self.predicted).abs()
    }
}

/// Provenance written to `metadata.json`; the embedded configuration alone
/// reproduces every other file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub wavenumber: f64,
    pub expected_rank: usize,
    pub signal_dim: usize,
    pub signal_dim_clamped_from: Option<usize>,
    pub requested_snr_db: Option<f64>,
    pub achieved_snr_db: Option<f64>,
    pub seed: u64,
    pub grid_shape: [usize; 2],
    pub map_median: f64,
    pub map_max: f64,
    pub peak_count: usize,
    pub min_center_distance: Option<f64>,
}

/// Everything one experiment computes.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub decomposition: SubspaceDecomposition,
    pub map: ImagingMap,
    pub peaks: Vec<Peak>,
    pub comparison: Option<Vec<ComparisonRow>>,
    pub metadata: Metadata,
}

impl ExperimentResult {
    pub fn singular_values(&self) -> &[f64] {
        &self.decomposition.singular_values
    }
}

/// Top `count` local maxima at least half a wavelength apart, dropping any
/// below the map median.
pub fn top_peaks(map: &ImagingMap, count: usize, wavelength: f64) -> Vec<Peak> {
    let median = map.median();
    find_peaks(map, 0.5 * wavelength, Some(count)).into_iter().filter(|p| p.value >= median).collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let config = config.clone().resolved();
    config.validate()?;
    let scene = config.scene.build()?;
    let report = validate_scene(&scene, config.scene.separation_margin);
    let min_center_distance = report.min_distance;
    report.into_result()?;
    let arcs = config.arcs();
    let rule = config.selection_rule();

    let msr = assemble_msr(&scene, arcs, config.mode, config.forward, config.noise())?;
    let decomposition = decompose(&msr, rule)?;
    let setup = ImagingSetup {
        floor: config.floor,
        ..ImagingSetup::new(arcs, config.mode, scene.wavenumber()).with_test_kind(config.test_vectors)
    };
    let map = music_map(&config.grid, &decomposition, &setup, config.noise().map(|n| n.seed))?;
    let peaks = top_peaks(&map, scene.len(), scene.wavelength());

    let comparison = if config.analytic_check {
        let grid = config.grid;
        let nodes: Vec<(usize, usize)> = (0..grid.ny()).flat_map(|j| (0..grid.nx()).map(move |i| (i, j))).collect();
        let rows = nodes
            .par_iter()
            .map(|&(i, j)| {
                let r = grid.node(i, j);
                let predicted = match config.mode {
                    ContrastMode::Permittivity => structure_eps_with_floor(r, &scene, &arcs, &config.truncation, config.floor)?,
                    ContrastMode::Permeability => structure_mu_with_floor(r, &scene, &arcs, &config.truncation, config.floor)?,
                };
                Ok(ComparisonRow { position: r, direct: map.at(i, j), predicted: predicted.min(setup.cap) })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(rows)
    } else {
        None
    };

    let noise = msr.noise();
    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash()?,
        config: config.clone(),
        wavenumber: scene.wavenumber(),
        expected_rank: config.mode.expected_rank(scene.len()),
        signal_dim: decomposition.signal_dim,
        signal_dim_clamped_from: decomposition.clamped_from,
        requested_snr_db: noise.map(|n| n.requested_snr_db),
        achieved_snr_db: noise.map(|n| n.achieved_snr_db),
        seed: config.seed,
        grid_shape: [map.nx(), map.ny()],
        map_median: map.median(),
        map_max: map.max(),
        peak_count: peaks.len(),
        min_center_distance,
    };
    Ok(ExperimentResult { config, decomposition, map, peaks, comparison, metadata })
}

/// Runs a catalogue case with the default pipeline.
pub fn run_case(id: u8, example: Example, seed: u64) -> Result<ExperimentResult> {
    run_experiment(&case_config(id, example, seed)?)
}
