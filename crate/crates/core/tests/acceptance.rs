//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use music_core::analytic::{
    arc_mean_exponential, arc_mean_exponential_side, arc_mean_weighted, lambda_eps, lambda_mu, quadrature_oracle,
    QuadratureWeight, SeriesTruncation,
};
use music_core::forward::{add_noise, empirical_snr_db, farfield_matrix, ContrastMode, ForwardKind};
use music_core::imaging::{projected_norms, Grid, ImagingSetup, TestSide};
use music_core::runner::{case, run_case, sweep_aperture, Example, PAPER_CENTERS};
use music_core::scene::{ApertureArc, ArcPair, Axis, Vec2};
use music_core::specfun::{bessel_bound, bessel_j, bessel_j_sequence, bessel_y_sequence};
use music_core::subspace::{assemble_msr, compute_svd, decompose, SelectionRule};
use music_core::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

const K: f64 = TAU / 0.4;
const LAMBDA: f64 = 0.4;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn err(e: music_core::MusicError) -> String {
    e.to_string()
}

fn wide_arcs() -> ArcPair {
    ArcPair::new(ApertureArc::centered(PI, PI, 32).unwrap(), ApertureArc::new(-FRAC_PI_2, FRAC_PI_2, 32).unwrap()).unwrap()
}

fn rank_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for (example, cut) in [(Example::Eps1, 3), (Example::Mu1, 6)] {
        let scene = example.scene().build().map_err(err)?;
        for id in 1..=8 {
            let c = case(id).map_err(err)?;
            let arcs = ArcPair::new(c.observation, c.incident).map_err(err)?;
            let msr = assemble_msr(&scene, arcs, example.mode(), ForwardKind::Asymptotic, None).map_err(err)?;
            let s = compute_svd(&msr).map_err(err)?.singular_values;
            let ratio = s[cut] / s[0];
            worst = worst.max(ratio);
            ensure(ratio < 1e-10, || format!("{example} case {id}: sigma_{}/sigma_1 = {ratio:.3e}", cut + 1))?;
        }
    }
    Ok(format!("worst sigma_(S+1 or 2S+1)/sigma_1 = {worst:.2e} over 8 cases x 2 modes"))
}

fn series_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let angle = Uniform::new(-PI, PI).unwrap();
    let width = Uniform::new(0.1, TAU).unwrap();
    let radius = Uniform::new(0.0, 1.5).unwrap();
    let trunc = SeriesTruncation::default();
    let mut worst: f64 = 0.0;
    let mut check = |s: Complex64, o: Complex64, what: &str| {
        let e = (s - o).norm() / (1.0 + o.norm());
        worst = worst.max(e);
        ensure(e <= 1e-8, || format!("{what}: series {s} vs oracle {o}"))
    };
    for _ in 0..100 {
        let start = angle.sample(&mut rng);
        let w = width.sample(&mut rng);
        let arc = ApertureArc::new(start, start + w, 8).map_err(err)?;
        let d = radius.sample(&mut rng) * Vec2::from_angle(angle.sample(&mut rng));
        for side in [TestSide::Observation, TestSide::Incidence] {
            let s = arc_mean_exponential_side(d, &arc, side, &trunc, K).map_err(err)?;
            let o = quadrature_oracle(d, &arc, side, QuadratureWeight::None, K).map_err(err)?;
            check(s, o, "plain mean")?;
        }
        let c = arc.weighted_normalizer();
        for h in Axis::BOTH {
            let s = arc_mean_weighted(d, &arc, h, &trunc, K).map_err(err)?;
            let o = quadrature_oracle(d, &arc, TestSide::Observation, QuadratureWeight::Axis(h), K).map_err(err)? * w / c;
            check(s, o, "weighted mean")?;
        }
    }
    Ok(format!("100 trials x 4 series, worst |s-o|/(1+|o|) = {worst:.2e}"))
}

fn full_aperture() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let angle = Uniform::new(-PI, PI).unwrap();
    let radius = Uniform::new(0.0, 2.0).unwrap();
    let trunc = SeriesTruncation::default();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let start = angle.sample(&mut rng);
        let arc = ApertureArc::new(start, start + TAU, 16).map_err(err)?;
        let d = radius.sample(&mut rng) * Vec2::from_angle(angle.sample(&mut rng));
        let mut values = Vec::new();
        for side in [TestSide::Observation, TestSide::Incidence] {
            values.push(lambda_eps(d, &arc, side, &trunc, K).map_err(err)?.norm());
            for h in Axis::BOTH {
                values.push(lambda_mu(d, &arc, side, h, &trunc, K).map_err(err)?.norm());
            }
        }
        let j0 = bessel_j(0, K * d.norm()).map_err(err)?;
        values.push((arc_mean_exponential(d, &arc, &trunc, K).map_err(err)? - Complex64::new(j0, 0.0)).norm());
        for v in values {
            worst = worst.max(v);
            ensure(v < 1e-12, || format!("d = {d:?}, start {start}: residual {v:.3e}"))?;
        }
    }
    Ok(format!("50 offsets, worst |Lambda| or |mean - J0| = {worst:.2e}"))
}

fn range_characterization() -> Outcome {
    let scene = Example::Eps1.scene().build().map_err(err)?;
    let arcs = wide_arcs();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let coord = Uniform::new(-1.5, 1.5).unwrap();
    let mut far = Vec::new();
    while far.len() < 20 {
        let p = Vec2::new(coord.sample(&mut rng), coord.sample(&mut rng));
        if PAPER_CENTERS.iter().all(|c| c.distance(p) >= LAMBDA) {
            far.push(p);
        }
    }
    let mut summary = Vec::new();
    for kind in [ForwardKind::Asymptotic, ForwardKind::FoldyLax] {
        let msr = assemble_msr(&scene, arcs, ContrastMode::Permittivity, kind, None).map_err(err)?;
        let d = decompose(&msr, SelectionRule::NOISELESS_DEFAULT).map_err(err)?;
        ensure(d.signal_dim == 3, || format!("{kind:?}: signal_dim {}", d.signal_dim))?;
        let setup = ImagingSetup::new(arcs, ContrastMode::Permittivity, K);
        let mut at_centers: f64 = 0.0;
        for c in PAPER_CENTERS {
            let (p, _) = projected_norms(c, &d, &setup).map_err(err)?;
            at_centers = at_centers.max(p);
        }
        let mut away = f64::INFINITY;
        for &p in &far {
            away = away.min(projected_norms(p, &d, &setup).map_err(err)?.0);
        }
        ensure(at_centers < 1e-6, || format!("{kind:?}: |P f(r_s)| = {at_centers:.3e}"))?;
        ensure(away > 0.1, || format!("{kind:?}: |P f| = {away:.3e} away from scatterers"))?;
        summary.push(format!("{kind:?}: max at r_s {at_centers:.1e}, min away {away:.3}"));
    }
    Ok(summary.join("; "))
}

/// Top-3 peaks each within `radius` of a distinct true location.
fn matched(peaks: &[Vec2], radius: f64) -> bool {
    if peaks.len() < 3 {
        return false;
    }
    let mut used = [false; 3];
    for p in peaks.iter().take(3) {
        let hit = (0..3).filter(|&s| !used[s]).min_by(|&a, &b| {
            p.distance(PAPER_CENTERS[a]).total_cmp(&p.distance(PAPER_CENTERS[b]))
        });
        match hit {
            Some(s) if p.distance(PAPER_CENTERS[s]) <= radius => used[s] = true,
            _ => return false,
        }
    }
    true
}

fn eps1_reproduction() -> Outcome {
    let mut worst: f64 = 0.0;
    for id in [6u8, 7, 8] {
        for seed in 1..=5 {
            let r = run_case(id, Example::Eps1, seed).map_err(err)?;
            let peaks: Vec<Vec2> = r.peaks.iter().map(|p| p.position).collect();
            ensure(matched(&peaks, 0.5 * LAMBDA), || format!("case {id} seed {seed}: peaks {peaks:?}"))?;
            for p in &peaks {
                worst = worst.max(PAPER_CENTERS.iter().map(|c| c.distance(*p)).fold(f64::INFINITY, f64::min));
            }
        }
    }
    Ok(format!("cases 6-8 x seeds 1-5 all matched, worst peak offset {worst:.3}"))
}

fn mu_two_peaks() -> Outcome {
    let r = run_case(8, Example::Mu1, 1).map_err(err)?;
    let map = &r.map;
    let maxima = map.local_maxima();
    let mut summary = Vec::new();
    for c in PAPER_CENTERS {
        let mut near: Vec<f64> = maxima.iter().filter(|p| p.position.distance(c) <= LAMBDA).map(|p| p.value).collect();
        near.sort_by(|a, b| b.total_cmp(a));
        let (i, j) = map.grid.nearest(c);
        let center = map.at(i, j);
        ensure(near.len() >= 2, || format!("{c:?}: only {} local maxima within lambda", near.len()))?;
        ensure(center < near[1], || format!("{c:?}: value at r_s {center} not below {:?}", &near[..2]))?;
        summary.push(format!("{} maxima, centre/second = {:.2}", near.len(), center / near[1]));
    }
    Ok(summary.join("; "))
}

fn remainder_trend() -> Outcome {
    let widths = [PI / 3.0, FRAC_PI_2, 2.0 * PI / 3.0, PI];
    let rows = sweep_aperture(Example::Eps1, &widths, &Grid::default(), &SeriesTruncation::default()).map_err(err)?;
    let max: Vec<f64> = rows.iter().map(|r| r.max_discrepancy).collect();
    ensure(max.windows(2).all(|w| w[1] <= w[0]), || format!("not non-increasing: {max:?}"))?;
    Ok(format!("max discrepancy {}", max.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(" >= ")))
}

fn noise_calibration() -> Outcome {
    let scene = Example::Eps1.scene().build().map_err(err)?;
    let arcs = wide_arcs();
    let clean = farfield_matrix(
        &scene,
        ContrastMode::Permittivity,
        ForwardKind::FoldyLax,
        &arcs.observation.directions(),
        &arcs.incidence.directions(),
    )
    .map_err(err)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for seed in 1..=20 {
        let a = add_noise(&clean, 20.0, seed).map_err(err)?;
        let b = add_noise(&clean, 20.0, seed).map_err(err)?;
        ensure(a == b, || format!("seed {seed} not reproducible"))?;
        let snr = empirical_snr_db(&clean, &a);
        lo = lo.min(snr);
        hi = hi.max(snr);
        ensure((19.5..=20.5).contains(&snr), || format!("seed {seed}: {snr:.3} dB"))?;
    }
    ensure(add_noise(&clean, 20.0, 1).map_err(err)? != add_noise(&clean, 20.0, 2).map_err(err)?, || {
        "different seeds gave identical noise".into()
    })?;
    Ok(format!("20 seeds, empirical SNR in [{lo:.3}, {hi:.3}] dB, bit-reproducible"))
}

fn special_functions() -> Outcome {
    // recurrence, relative to the size of the terms
    for &x in &[0.1, 0.5, 1.0, 3.7, 10.0, 25.0, 39.9, 40.1, 63.0, 100.0] {
        let j = bessel_j_sequence(51, x).map_err(err)?;
        for n in 1..=50 {
            let lhs = j[n - 1] + j[n + 1];
            let rhs = 2.0 * n as f64 / x * j[n];
            let scale = j[n - 1].abs().max(j[n + 1].abs()).max(rhs.abs());
            ensure((lhs - rhs).abs() <= 1e-9 * scale, || format!("recurrence n={n} x={x}: {lhs} vs {rhs}"))?;
        }
    }
    // Wronskian
    for &x in &[0.5, 1.0, 2.5, 7.0, 15.0, 39.0, 41.0, 80.0, 150.0] {
        let j = bessel_j_sequence(11, x).map_err(err)?;
        let y = bessel_y_sequence(11, x).map_err(err)?;
        let target = 2.0 / (PI * x);
        for n in 0..=10 {
            let w = j[n + 1] * y[n] - j[n] * y[n + 1];
            ensure(((w - target) / target).abs() <= 1e-10, || format!("Wronskian n={n} x={x}: {w} vs {target}"))?;
        }
    }
    // uniform bound on a randomized grid
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs = Uniform::new(0.1, 100.0).unwrap();
    for _ in 0..2000 {
        let x = xs.sample(&mut rng);
        let j = bessel_j_sequence(60, x).map_err(err)?;
        for p in 1..=60u32 {
            ensure(j[p as usize].abs() <= bessel_bound(p, x), || format!("bound fails at p={p} x={x}"))?;
        }
    }
    // first J0 zeros
    for root in [2.404_825_557_695_773, 5.520_078_110_286_311, 8.653_727_912_911_013, 11.791_534_439_014_281] {
        let v = bessel_j(0, root).map_err(err)?;
        ensure(v.abs() < 1e-12, || format!("J0({root}) = {v:e}"))?;
    }
    Ok("recurrence, Wronskian, bound (2000 x 60) and J0 zeros".into())
}

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "rank law", budget: Duration::from_secs(1), run: rank_law },
        Criterion { id: 2, name: "series vs quadrature", budget: Duration::from_secs(10), run: series_oracle },
        Criterion { id: 3, name: "full-aperture collapse", budget: Duration::from_secs(1), run: full_aperture },
        Criterion { id: 4, name: "range characterization", budget: Duration::from_secs(1), run: range_characterization },
        Criterion { id: 5, name: "EPS1 reproduction", budget: Duration::from_secs(30), run: eps1_reproduction },
        Criterion { id: 6, name: "permeability two-peak signature", budget: Duration::from_secs(30), run: mu_two_peaks },
        Criterion { id: 7, name: "remainder trend", budget: Duration::from_secs(60), run: remainder_trend },
        Criterion { id: 8, name: "noise determinism and calibration", budget: Duration::from_secs(1), run: noise_calibration },
        Criterion { id: 9, name: "special functions", budget: Duration::from_secs(5), run: special_functions },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {elapsed:.2?}, budget {:?}", c.budget)),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {} [{status}] {} ({elapsed:.2?}): {detail}", c.id, c.name);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
