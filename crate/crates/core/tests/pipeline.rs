use music_core::imaging::Grid;
use music_core::runner::{case_config, run_case, run_experiment, write_artifacts, Example, PAPER_CENTERS};
use music_core::Vec2;
use std::fs;

fn nearest_center(p: Vec2) -> (usize, f64) {
    PAPER_CENTERS
        .iter()
        .enumerate()
        .map(|(s, c)| (s, c.distance(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

#[test]
fn same_seed_same_bytes() {
    let config = case_config(7, Example::Eps2, 4).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_artifacts(&run_experiment(&config).unwrap(), a.path()).unwrap();
    write_artifacts(&run_experiment(&config).unwrap(), b.path()).unwrap();
    for f in ["singular_values.csv", "map.csv", "map.pgm", "peaks.csv", "metadata.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let mut other = config.clone();
    other.seed = 5;
    let r = run_experiment(&other).unwrap();
    assert_ne!(r.map.values, run_experiment(&config).unwrap().map.values);
}

#[test]
fn case5_eps1_finds_every_scatterer() {
    let r = run_case(5, Example::Eps1, 1).unwrap();
    assert_eq!(r.peaks.len(), 3);
    let mut hit = [false; 3];
    for p in &r.peaks {
        let (s, d) = nearest_center(p.position);
        assert!(d <= 0.2, "{p:?}");
        hit[s] = true;
    }
    assert_eq!(hit, [true; 3]);
}

#[test]
fn case1_eps1_has_maxima_near_every_scatterer() {
    let r = run_case(1, Example::Eps1, 1).unwrap();
    let maxima = r.map.local_maxima();
    for c in PAPER_CENTERS {
        assert!(maxima.iter().any(|p| p.position.distance(c) <= 0.4), "{c:?}");
    }
}

#[test]
fn case6_mu2_records_signal_dim() {
    let r = run_case(6, Example::Mu2, 1).unwrap();
    let m = &r.metadata;
    assert_eq!(m.expected_rank, 6);
    assert!(m.signal_dim >= 1 && m.signal_dim < 32);
    assert!((m.achieved_snr_db.unwrap() - 20.0).abs() < 1.0);
}

#[test]
fn halving_the_aperture_does_not_sharpen_localisation() {
    let localisation = |width: f64| {
        let mut c = case_config(8, Example::Eps1, 1).unwrap();
        c.observation_arc = music_core::ApertureArc::centered(std::f64::consts::PI, width, 32).unwrap();
        c.incident_arc = music_core::ApertureArc::centered(0.0, width, 32).unwrap();
        c.grid = Grid { step: 0.02, ..Grid::default() };
        let r = run_experiment(&c).unwrap();
        r.peaks.iter().map(|p| nearest_center(p.position).1).sum::<f64>()
    };
    let pi = std::f64::consts::PI;
    assert!(localisation(pi / 2.0) >= localisation(pi));
}
