//! Aperture sweep: predicted versus measured noise-space norms.

use super::cases::Example;
use crate::analytic::{residual_eps, residual_mu, SeriesTruncation};
use crate::error::{MusicError, Result};
use crate::forward::{ContrastMode, ForwardKind};
use crate::imaging::{projected_norm_map, Grid, ImagingSetup};
use crate::scene::{ApertureArc, ArcPair, DEFAULT_ARC_COUNT};
use crate::subspace::{assemble_msr, decompose, SelectionRule};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Discrepancy between the series prediction of `‖ℙf(r)‖²` and its
/// measured value, over a grid, for one aperture width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub width: f64,
    pub signal_dim: usize,
    pub max_discrepancy: f64,
    pub mean_discrepancy: f64,
}

/// Both arcs get `width` (observation centred at `π`, incidence at `0`); the
/// data are noiseless and asymptotic.
pub fn sweep_aperture(example: Example, widths: &[f64], grid: &Grid, trunc: &SeriesTruncation) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    let scene = example.scene().build()?;
    let mode = example.mode();
    let nodes: Vec<(usize, usize)> = (0..grid.ny()).flat_map(|j| (0..grid.nx()).map(move |i| (i, j))).collect();
    widths
        .iter()
        .map(|&width| {
            let arcs = ArcPair::new(
                ApertureArc::centered(PI, width, DEFAULT_ARC_COUNT)?,
                ApertureArc::centered(0.0, width, DEFAULT_ARC_COUNT)?,
            )?;
            let msr = assemble_msr(&scene, arcs, mode, ForwardKind::Asymptotic, None)?;
            let decomposition = decompose(&msr, SelectionRule::NOISELESS_DEFAULT)?;
            let setup = ImagingSetup::new(arcs, mode, scene.wavenumber());
            let norms = projected_norm_map(grid, &decomposition, &setup)?;
            let gaps = nodes
                .par_iter()
                .zip(norms.par_iter())
                .map(|(&(i, j), &(p, _))| {
                    let r = grid.node(i, j);
                    let predicted = match mode {
                        ContrastMode::Permittivity => residual_eps(r, &scene, &arcs, trunc)?.0,
                        ContrastMode::Permeability => residual_mu(r, &scene, &arcs, trunc)?.0,
                    };
                    Ok((predicted - p * p).abs())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(SweepRow {
                width,
                signal_dim: decomposition.signal_dim,
                max_discrepancy: gaps.iter().copied().fold(0.0, f64::max),
                mean_discrepancy: gaps.iter().sum::<f64>() / gaps.len() as f64,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("width,signal_dim,max_discrepancy,mean_discrepancy\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.width, r.signal_dim, r.max_discrepancy, r.mean_discrepancy);
    }
    out
}

/// Angles such as `1.2`, `pi`, `π/3`, `2pi/3` or `5*pi/6`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let bad = || MusicError::Config(format!("cannot read angle {text:?}; use a number or a form like 2pi/3"));
    let s: String = text.trim().to_ascii_lowercase().replace('π', "pi").replace(' ', "");
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().map_err(|_| bad())?),
        None => (s.clone(), 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
            c * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let angle = value / den;
    if angle.is_finite() { Ok(angle) } else { Err(bad()) }
}
