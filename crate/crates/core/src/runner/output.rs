//! CSV, PGM and JSON emission.

use super::config::{OutputKind, ANALYTIC_FILE};
use super::{ComparisonRow, ExperimentResult};
use crate::error::{MusicError, Result};
use crate::imaging::{ImagingMap, Peak};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub fn singular_values_csv(values: &[f64]) -> String {
    let mut out = String::from("sigma\n");
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

/// One row per node, `y` outer.
pub fn map_csv(map: &ImagingMap) -> String {
    let mut out = String::from("x,y,value\n");
    for j in 0..map.ny() {
        for i in 0..map.nx() {
            let p = map.grid.node(i, j);
            let _ = writeln!(out, "{},{},{}", p.x, p.y, map.at(i, j));
        }
    }
    out
}

/// Binary 8-bit greymap, min–max normalised; the first row is the largest `y`.
pub fn map_pgm(map: &ImagingMap) -> Vec<u8> {
    let (nx, ny) = (map.nx(), map.ny());
    let lo = map.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = map.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    out.reserve(nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            let t = if span > 0.0 { (map.at(i, j) - lo) / span } else { 0.0 };
            out.push((255.0 * t).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn peaks_csv(peaks: &[Peak]) -> String {
    let mut out = String::from("rank,x,y,value\n");
    for (rank, p) in peaks.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{}", rank + 1, p.position.x, p.position.y, p.value);
    }
    out
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("x,y,direct,predicted,discrepancy\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.position.x, r.position.y, r.direct, r.predicted, r.discrepancy());
    }
    out
}

fn render(result: &ExperimentResult, kind: OutputKind) -> Result<Vec<u8>> {
    Ok(match kind {
        OutputKind::SingularValues => singular_values_csv(result.singular_values()).into_bytes(),
        OutputKind::MapCsv => map_csv(&result.map).into_bytes(),
        OutputKind::MapPgm => map_pgm(&result.map),
        OutputKind::Peaks => peaks_csv(&result.peaks).into_bytes(),
        OutputKind::Metadata => {
            let mut text = serde_json::to_string_pretty(&result.metadata)?;
            text.push('\n');
            text.into_bytes()
        }
    })
}

/// Writes the configured files into `dir` (created if missing). If any write
/// fails, the files written so far are removed.
pub fn write_artifacts(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    for &kind in &result.config.outputs {
        files.push((dir.join(kind.file_name()), render(result, kind)?));
    }
    if let Some(rows) = &result.comparison {
        files.push((dir.join(ANALYTIC_FILE), comparison_csv(rows).into_bytes()));
    }
    let created_dir = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| MusicError::io(dir, e))?;
    let mut written = Vec::new();
    for (path, bytes) in files {
        if let Err(e) = fs::write(&path, &bytes) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            if created_dir {
                let _ = fs::remove_dir(dir);
            }
            return Err(MusicError::io(&path, e));
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::ContrastMode;
    use crate::imaging::{Grid, MapMetadata, TestKind};
    use crate::scene::{ApertureArc, ArcPair, Vec2};
    use crate::subspace::SelectionRule;

    fn small_map() -> ImagingMap {
        let arc = ApertureArc::new(0.0, 1.0, 4).unwrap();
        ImagingMap {
            grid: Grid { x: [0.0, 0.2], y: [0.0, 0.1], step: 0.1 },
            values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 9.0],
            metadata: MapMetadata {
                mode: ContrastMode::Permittivity,
                arcs: ArcPair::new(arc, arc).unwrap(),
                rule: SelectionRule::LargestLogGap,
                signal_dim: 1,
                seed: None,
                test_kind: TestKind::Eps,
                floor: 1e-8,
                cap: 1e8,
            },
        }
    }

    #[test]
    fn csv_layouts() {
        let m = small_map();
        let csv = map_csv(&m);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines[1], "0,0,1");
        assert_eq!(lines[4], "0,0.1,4");
        assert_eq!(lines.len(), 7);
        assert_eq!(singular_values_csv(&[2.5, 0.5]), "sigma\n2.5\n0.5\n");
        let p = Peak { i: 2, j: 1, position: Vec2::new(0.2, 0.1), value: 9.0 };
        assert_eq!(peaks_csv(&[p]), "rank,x,y,value\n1,0.2,0.1,9\n");
        let row = ComparisonRow { position: Vec2::new(0.5, -0.5), direct: 2.0, predicted: 1.5 };
        assert_eq!(comparison_csv(&[row]), "x,y,direct,predicted,discrepancy\n0.5,-0.5,2,1.5,0.5\n");
    }

    #[test]
    fn pgm_is_flipped_and_normalised() {
        let pgm = map_pgm(&small_map());
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        // top row is y = 0.1: values 4, 5, 9
        assert_eq!(&pgm[header.len()..], &[96, 128, 255, 0, 32, 64]);
    }
}
