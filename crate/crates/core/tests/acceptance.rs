//! The twelve acceptance criteria, one pass/fail line each. Runs as a plain
//! binary so the lines are printed even when output capture is on.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mcflab::axisym::{
    self, dumbbell_component_series, dumbbell_delta, dumbbell_plane_height, dumbbell_profile, marriage_ring_profile,
    ring_graph_patches, ring_intersection_series, sphere_profile, MarriageRing,
};
use mcflab::csf::{self, run_pair_monitor, run_self_monitor, CsfState, MonitorOptions};
use mcflab::geometry::{resample, shapes, ScalarField2D, Vec2};
use mcflab::graphical::{assemble_coefficients, one_sided_test, residual_max, GraphPair};
use mcflab::lab::{parse_config, run_scenario, CSF_DEFAULT_H, CSF_PAIRS};
use mcflab::levelset::cone::ConeSetup;
use mcflab::levelset::{
    cone_intersection_scenario, disk_state, dumbbell_state, fattening_series, ConeSeries, FatteningReport, InnerOuter,
    LsMode, TrackMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, secs: u64) -> Result<(), String> {
    ensure(elapsed <= Duration::from_secs(secs), format!("runtime {:.1}s exceeds {secs}s", elapsed.as_secs_f64()))
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// 1. exact circle and sphere laws
fn shrinking_circle_and_sphere() -> Check {
    let start = Instant::now();
    let n = 512;
    let mut state = CsfState::new(shapes::circle(Vec2::ZERO, 1.0, n));
    let h = TAU / n as f64;
    let mut worst_c: f64 = 0.0;
    for k in 1..=40 {
        let t = 0.01 * k as f64;
        state = csf::evolve_until(state, t).map_err(e2s)?;
        let c = &state.curve;
        let o = c.centroid();
        let r = c.vertices().iter().map(|p| p.dist(o)).sum::<f64>() / c.len() as f64;
        worst_c = worst_c.max((r * r - (1.0 - 2.0 * t)).abs());
    }
    ensure(worst_c < 10.0 * h, format!("circle error {worst_c:.2e} >= 10h = {:.2e}", 10.0 * h))?;

    let hs = 1.0 / 256.0;
    let segments = (PI / hs).round() as usize;
    let mut sphere = sphere_profile(1.0, 0.0, 2, segments).map_err(e2s)?;
    let mut worst_s: f64 = 0.0;
    for k in 1..=20 {
        let t = 0.01 * k as f64;
        sphere = axisym::evolve_until(sphere, t).map_err(e2s)?;
        let v = sphere.profile.vertices();
        let r = v.iter().map(|p| p.norm()).sum::<f64>() / v.len() as f64;
        worst_s = worst_s.max((r * r - (1.0 - 4.0 * t)).abs());
    }
    ensure(worst_s < 10.0 * hs, format!("sphere error {worst_s:.2e} >= 10h = {:.2e}", 10.0 * hs))?;
    within(start.elapsed(), 20)?;
    Ok(format!(
        "max |r²-law| circle {worst_c:.1e} (10h {:.1e}), sphere {worst_s:.1e} (10h {:.1e})",
        10.0 * h,
        10.0 * hs
    ))
}

// 2. ellipticity of the difference equation
fn ellipticity() -> Check {
    let line = |fu: fn(f64) -> f64, fv: fn(f64) -> f64| -> Result<GraphPair, String> {
        let h = 2.0 / 64.0;
        GraphPair::new(
            ScalarField2D::line(65, h, -1.0, fu).map_err(e2s)?,
            ScalarField2D::line(65, h, -1.0, fv).map_err(e2s)?,
        )
        .map_err(e2s)
    };
    let square = |fu: fn(Vec2) -> f64, fv: fn(Vec2) -> f64| -> Result<GraphPair, String> {
        let h = 1.0 / 32.0;
        GraphPair::new(
            ScalarField2D::from_fn(33, 33, h, Vec2::ZERO, fu).map_err(e2s)?,
            ScalarField2D::from_fn(33, 33, h, Vec2::ZERO, fv).map_err(e2s)?,
        )
        .map_err(e2s)
    };
    let slopes = line(|x| x, |x| -x)?;
    let c = assemble_coefficients(&slopes);
    let worst = c.a.iter().map(|a| (a[0] - PI / 4.0).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-10, format!("a11 for u=x, v=-x is off pi/4 by {worst:e}"))?;

    let ring = MarriageRing::new(2).map_err(e2s)?;
    let mut pairs = vec![
        ("opposite slopes", slopes),
        ("sine/parabola", square(|p| (3.0 * p.x).sin() * p.y, |p| 0.5 * p.x * p.x - p.y)?),
        ("tilted waves", square(|p| 0.3 * (2.0 * p.x + p.y).sin(), |p| 0.4 * p.x * p.y - 0.2 * (3.0 * p.y).cos())?),
    ];
    let patches = ring_graph_patches(&ring, 33, 0.02).map_err(e2s)?;
    for (name, p) in ["ring inner patch", "ring outer patch"].into_iter().zip(patches) {
        pairs.push((name, p));
    }
    let mut out = Vec::new();
    for (name, p) in &pairs {
        let c = assemble_coefficients(p);
        let lo = 1.0 / (1.0 + c.c_bound) - 1e-9;
        let (mut emin, mut emax) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..c.a.len() {
            let (a, b) = c.eigenvalues(k);
            emin = emin.min(a);
            emax = emax.max(b);
        }
        ensure(emin >= lo && emax <= 1.0 + 1e-9, format!("{name}: eigenvalues [{emin}, {emax}] outside [{lo}, 1]"))?;
        out.push(format!("{name} C={:.2}", c.c_bound));
    }
    Ok(format!("{} pairs in bracket ({}); a11 = pi/4 within {worst:.0e}", pairs.len(), out.join(", ")))
}

// 3. residual convergence order
fn residual_order() -> Check {
    let start = Instant::now();
    let pair = |n: usize| -> Result<GraphPair, String> {
        let h = 1.0 / (n - 1) as f64;
        let u = ScalarField2D::from_fn(n, n, h, Vec2::ZERO, |p| 0.3 * (2.0 * p.x + p.y).sin() + 0.1 * p.y * p.y)
            .map_err(e2s)?;
        let v =
            ScalarField2D::from_fn(n, n, h, Vec2::ZERO, |p| 0.4 * p.x * p.y - 0.2 * (3.0 * p.y).cos()).map_err(e2s)?;
        GraphPair::new(u, v).map_err(e2s)
    };
    let mut r = Vec::new();
    for n in [17, 33, 65] {
        r.push(residual_max(&pair(n)?.evolve_until(0.002).map_err(e2s)?));
    }
    let o1 = (r[0] / r[1]).log2();
    let o2 = (r[1] / r[2]).log2();
    ensure(o1 >= 1.8 && o2 >= 1.8, format!("orders {o1:.2}, {o2:.2} (residuals {r:?})"))?;
    within(start.elapsed(), 60)?;
    Ok(format!("orders {o1:.2}, {o2:.2}"))
}

// 4. convex pairs under curve shortening
fn convex_pairs() -> Check {
    let (horizon, dt) = (0.5, 0.01);
    let run = |name: &str, h: f64, t_end: f64| -> Result<(bool, Option<f64>), String> {
        let entry = CSF_PAIRS.iter().find(|p| p.name == name).expect("catalog entry");
        let (a, b) = (entry.a.polyline(h).map_err(e2s)?, entry.b.polyline(h).map_err(e2s)?);
        let (_, v) = run_pair_monitor(&a, &b, t_end, dt, MonitorOptions::default()).map_err(e2s)?;
        Ok((v.monotone_count == Some(true), v.t0_detected))
    };
    let mut worst: f64 = 0.0;
    for entry in &CSF_PAIRS {
        let (monotone, t0) = run(entry.name, CSF_DEFAULT_H, horizon)?;
        ensure(monotone, format!("{}: count not monotone", entry.name))?;
        let t0 = t0.ok_or(format!("{}: separation not observed", entry.name))?;
        // circles have exact separation times; ellipses are checked against
        // a rerun at twice the resolution, long enough to cover the tolerance
        let oracle = match entry.exact_separation_time() {
            Some(t) => Some(t),
            None => run(entry.name, CSF_DEFAULT_H / 2.0, horizon.min(t0 + 4.0 * dt))?.1,
        };
        let oracle = oracle.ok_or(format!("{}: no separation within 4 samples of t0 = {t0}", entry.name))?;
        let err = (t0 - oracle).abs();
        ensure(err <= 2.0 * dt + 1e-12, format!("{}: t0 {t0} vs oracle {oracle:.4}", entry.name))?;
        worst = worst.max(err);
    }
    Ok(format!("{} pairs monotone; max |t0 - oracle| = {worst:.4} (limit {})", CSF_PAIRS.len(), 2.0 * dt))
}

// 5. self-intersections of immersed curves
fn self_intersections() -> Check {
    let mut out = Vec::new();
    for (name, curve, start) in
        [("figure-eight", shapes::figure_eight(1.0, 4096), 1), ("three-crossing", shapes::trefoil(0.3, 4096), 3)]
    {
        let c = resample(&curve, CSF_DEFAULT_H).map_err(e2s)?;
        let (series, _) = run_self_monitor(&c, 0.5, 0.005, MonitorOptions::default()).map_err(e2s)?;
        let counts = series.counts();
        ensure(counts.first() == Some(&start), format!("{name}: starts with {:?} crossings", counts.first()))?;
        if let Some(k) = (1..counts.len()).find(|&k| counts[k] > counts[k - 1]) {
            return Err(format!(
                "{name}: count rose {} -> {} at t = {}",
                counts[k - 1],
                counts[k],
                series.samples[k].t
            ));
        }
        let last = series.samples.last().map_or(0.0, |s| s.t);
        out.push(format!("{name} {start} -> {} over {} samples to t = {last}", counts[counts.len() - 1], counts.len()));
    }
    Ok(out.join("; "))
}

// 6. marriage ring
fn marriage_ring() -> Check {
    let start = Instant::now();
    let state = marriage_ring_profile(2).map_err(e2s)?;
    let vertices = state.profile.len();
    ensure(vertices >= 1024, format!("only {vertices} vertices"))?;
    let series = ring_intersection_series(&state, 0.02, 0.0005, false).map_err(e2s)?;
    let analytic = TAU * ((10.0 - 1.0 / 20.0) - (1.0 / 10.0 + 1.0 / 21.0));
    let rate = series.initial_rate;
    let rel = (rate - analytic).abs() / analytic;
    ensure(rate > 0.0 && rel <= 0.10, format!("rate {rate:.3} vs analytic {analytic:.3} ({:.1}%)", 100.0 * rel))?;
    let delta = series.delta;
    ensure(delta >= 0.002, format!("delta {delta} < 0.002"))?;
    let window: Vec<f64> = series.samples.iter().filter(|s| s.t <= delta + 1e-12).map(|s| s.measure).collect();
    ensure(window.len() >= 2, "fewer than two samples on [0, delta]")?;
    if let Some(k) = (1..window.len()).find(|&k| window[k] <= window[k - 1]) {
        return Err(format!("measure not strictly increasing at sample {k}"));
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "rate {rate:.2} vs {analytic:.2} ({:.1}%), strictly increasing over {} samples on [0, {delta}]",
        100.0 * rel,
        window.len()
    ))
}

// 7. dumbbell
fn dumbbell() -> Check {
    let (l, eps) = (8.0, 0.5);
    let state = dumbbell_profile(l, eps).map_err(e2s)?;
    let h = state.h_target;
    let z = dumbbell_plane_height(eps, dumbbell_delta(eps, 2));
    let s = dumbbell_component_series(&state, l, z, 0.02, 0.0005, false).map_err(e2s)?;
    ensure(s.samples.first().map(|x| x.components) == Some(1), "section not connected at t = 0")?;
    let split = s.samples.iter().find(|x| x.components >= 2).ok_or("no 1 -> 2 transition")?;
    let worst = s.samples.iter().map(|x| x.barrier_margin).fold(f64::INFINITY, f64::min);
    ensure(worst > -3.0 * h, format!("barrier violated by {:.3e} (3h = {:.3e})", -worst, 3.0 * h))?;
    Ok(format!(
        "1 -> {} components at t = {:.4}; min barrier margin {worst:.3} (> -3h = {:.3})",
        split.components,
        split.t,
        -3.0 * h
    ))
}

fn cone_run(h: f64) -> Result<ConeSeries, String> {
    let setup = ConeSetup { h, ..ConeSetup::default() };
    cone_intersection_scenario(&setup, 0.04, 0.004).map_err(e2s)
}

// 8. cone: dimension jump and self-similar growth
fn cone(fine: &ConeSeries) -> Check {
    let s0 = &fine.samples[0];
    ensure(s0.measure_est == 0.0 && s0.components == 1, format!("t = 0 sample {s0:?}"))?;
    for s in &fine.samples[1..] {
        let d = s.dim_est.unwrap_or(f64::NAN);
        ensure(
            s.measure_est > 0.0 && (0.8..=1.2).contains(&d),
            format!("t = {}: measure {}, dim {d}", s.t, s.measure_est),
        )?;
    }
    ensure(fine.verdict.monotone_dim == Some(false), "monotone_dim is not false")?;
    let spread = fine.scaling_spread().ok_or("no crossing radii")?;
    ensure(spread <= 0.10, format!("r/sqrt(t) spread {:.1}% > 10%", 100.0 * spread))?;
    Ok(format!(
        "h = 1/256: dim 0 -> {:.2}, r/sqrt(t) spread {:.1}%",
        fine.samples[1].dim_est.unwrap_or(0.0),
        100.0 * spread
    ))
}

fn run_config(json: &str, dir: &Path) -> Result<mcflab::Verdict, String> {
    let cfg = parse_config(json).map_err(e2s)?;
    Ok(run_scenario(&cfg, dir).map_err(e2s)?.verdict)
}

// 9. localizability
fn localizability() -> Check {
    let tmp = tempfile::tempdir().map_err(e2s)?;
    let mut out = Vec::new();
    for (split, horizon, dt, expect) in
        [("dumbbell", 0.25, 0.01, true), ("circles", 0.08, 0.02, true), ("cone", 0.02, 0.004, false)]
    {
        let json = format!(r#"{{"scenario":"localizability","split":"{split}","horizon":{horizon},"sample_dt":{dt}}}"#);
        let v = run_config(&json, &tmp.path().join(split))?;
        ensure(v.localizable == Some(expect), format!("{split}: localizable = {:?}", v.localizable))?;
        out.push(format!("{split} {}", if expect { "passes" } else { "expected-fail recorded" }));
    }
    Ok(out.join(", "))
}

/// Longest run of consecutive samples with strictly growing positive fat.
fn fat_growth(reports: &[FatteningReport]) -> usize {
    let (mut best, mut run) = (0, 0);
    for k in 0..reports.len() {
        let grows = k > 0 && reports[k].fat_volume > reports[k - 1].fat_volume && reports[k - 1].fat_volume > 0.0;
        run = if grows { run + 1 } else { usize::from(reports[k].fat_volume > 0.0) };
        best = best.max(run);
    }
    best
}

// 10. fattening detector calibration
fn fattening(fine: &ConeSeries) -> Check {
    let mut out = Vec::new();
    for h in [1.0 / 64.0, 1.0 / 128.0] {
        let s = disk_state(1.0, Vec2::ZERO, h, 1.25, LsMode::Planar).map_err(e2s)?;
        let run = InnerOuter::new(s, TrackMode::Offset).map_err(e2s)?;
        let series = fattening_series(run, "circle", 0.4, 0.04, false).map_err(e2s)?;
        ensure(!series.fattening(), format!("circle at h = {h} reported fattening"))?;
    }
    out.push("circle non-fattening at 1/64, 1/128".to_string());
    for h in [0.1, 0.05] {
        let s = dumbbell_state(6.0, 0.5, h).map_err(e2s)?;
        let run = InnerOuter::new(s, TrackMode::Offset).map_err(e2s)?;
        let series = fattening_series(run, "dumbbell", 0.2, 0.01, false).map_err(e2s)?;
        ensure(series.components.iter().any(|&c| c >= 2), format!("dumbbell at h = {h} did not pinch"))?;
        ensure(!series.fattening(), format!("dumbbell at h = {h} reported fattening"))?;
    }
    out.push("dumbbell through pinch non-fattening at 0.1, 0.05".to_string());
    let coarse = cone_run(1.0 / 128.0)?;
    for (name, s) in [("1/128", &coarse), ("1/256", fine)] {
        let g = fat_growth(&s.reports);
        ensure(s.fattening() && g >= 3, format!("cone at h = {name}: fattening {}, growth run {g}", s.fattening()))?;
        out.push(format!("cone {name} fattens, fat grows over {g} samples"));
    }
    Ok(out.join("; "))
}

// 11. nodal one-sidedness on random fields
fn nodal_one_sided() -> Check {
    let n = 65;
    let h = 1.0 / (n - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut checked, mut tries, mut smallest) = (0, 0, f64::INFINITY);
    while checked < 100 {
        tries += 1;
        ensure(tries < 10_000, "could not draw 100 sign-changing fields")?;
        let modes: Vec<(f64, f64, f64, f64)> = (0..4)
            .map(|_| {
                (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0), rng.gen_range(0.0..TAU))
            })
            .collect();
        let offset: f64 = rng.gen_range(-1.5..1.5);
        let w = ScalarField2D::from_fn(n, n, h, Vec2::ZERO, |p| {
            offset + modes.iter().map(|&(a, kx, ky, ph)| a * (kx * p.x + ky * p.y + ph).sin()).sum::<f64>()
        })
        .map_err(e2s)?;
        let r = one_sided_test(&w);
        if !r.sign_change {
            continue;
        }
        checked += 1;
        smallest = smallest.min(r.nodal_measure_est);
        ensure(r.nodal_measure_est > h, format!("field {checked}: nodal measure {} <= h", r.nodal_measure_est))?;
    }
    Ok(format!("{checked} sign-changing fields ({tries} drawn), min nodal measure {smallest:.4} > h = {h}"))
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in walk(dir) {
        if entry.extension().is_some_and(|x| x == "csv") {
            let key = entry.strip_prefix(dir).expect("below root").display().to_string();
            out.insert(key, std::fs::read(&entry).expect("readable"));
        }
    }
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).into_iter().flatten().flatten() {
        let p = e.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

// 12. determinism
fn determinism() -> Check {
    let suite = [
        ("pair", r#"{"scenario":"csf_pair","pair":"unequal_outer","horizon":0.2,"sample_dt":0.02}"#),
        ("self", r#"{"scenario":"csf_self","curve":"three_crossing","horizon":0.05,"sample_dt":0.01}"#),
        ("graph", r#"{"scenario":"graphical_pair","horizon":0.05,"sample_dt":0.01}"#),
        ("custom", r#"{"scenario":"custom","seed":42,"horizon":0.1,"sample_dt":0.02}"#),
        ("cone", r#"{"scenario":"cone_fattening","resolution":0.03125,"horizon":0.02,"sample_dt":0.004}"#),
        ("split", r#"{"scenario":"localizability","split":"circles","horizon":0.04,"sample_dt":0.01}"#),
    ];
    let tmp = tempfile::tempdir().map_err(e2s)?;
    let mut trees = Vec::new();
    for (rep, threads) in [(0, 1), (1, 3)] {
        let root = tmp.path().join(format!("rep{rep}"));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(e2s)?;
        pool.install(|| -> Result<(), String> {
            for (name, json) in suite {
                run_config(json, &root.join(name))?;
            }
            Ok(())
        })?;
        trees.push(csv_files(&root));
    }
    ensure(!trees[0].is_empty(), "no CSV output")?;
    ensure(trees[0].keys().eq(trees[1].keys()), "different CSV file sets")?;
    for (k, a) in &trees[0] {
        ensure(trees[1][k] == *a, format!("{k} differs between runs"))?;
    }
    Ok(format!("{} CSV files bit-identical across two runs (1 and 3 threads)", trees[0].len()))
}

fn main() -> ExitCode {
    // the libtest flags cargo passes through are irrelevant here
    let mut fine: Option<Result<ConeSeries, String>> = None;
    let mut cone_fine = || fine.get_or_insert_with(|| cone_run(1.0 / 256.0)).clone();
    let mut failures = 0;
    let mut report = |k: usize, name: &str, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {k:>2} {name}: PASS ({msg}) [{secs:.1}s]"),
            Err(msg) => {
                failures += 1;
                println!("criterion {k:>2} {name}: FAIL ({msg}) [{secs:.1}s]");
            }
        }
    };
    report(1, "circle/sphere regression", &mut shrinking_circle_and_sphere);
    report(2, "difference-PDE ellipticity", &mut ellipticity);
    report(3, "difference-PDE residual order", &mut residual_order);
    report(4, "CSF intersection monotonicity", &mut convex_pairs);
    report(5, "CSF self-intersection monotonicity", &mut self_intersections);
    report(6, "marriage ring", &mut marriage_ring);
    report(7, "dumbbell", &mut dumbbell);
    report(8, "cone scenario", &mut || cone(&cone_fine()?));
    report(9, "localizability", &mut localizability);
    report(10, "fattening calibration", &mut || fattening(&cone_fine()?));
    report(11, "nodal one-sidedness", &mut nodal_one_sided);
    report(12, "determinism", &mut determinism);
    if failures == 0 {
        println!("acceptance: all 12 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 12 criteria fail");
        ExitCode::FAILURE
    }
}
