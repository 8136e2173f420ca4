use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::{ScenarioConfig, ScenarioKind, SelfCurve, Split, SPLIT_DUMBBELL_L};
use super::csf_pair;
use crate::axisym::{
    dumbbell_component_series, dumbbell_delta, dumbbell_plane_height, dumbbell_profile_with,
    marriage_ring_profile_with, ring_intersection_series, MarriageRing,
};
use crate::csf::{run_pair_monitor, run_self_monitor, MonitorOptions};
use crate::error::{Error, Result};
use crate::geometry::{resample, shapes, Contour, Polyline, ScalarField2D, Vec2};
use crate::graphical::{evolve_pair_and_track_nodal, GraphPair, NodalRecord};
use crate::levelset::cone::ConeSetup;
use crate::levelset::{
    cone_intersection_scenario, double_cone_state, dumbbell_state, evolve_until, localizability_check,
    zero_set_components, LevelSetState, LsMode, Region,
};
use crate::svg::{self, Stroke};
use crate::verdict::{counts_as_values, first_empty_time, scan_nonincreasing, Verdict};

/// Verdict of a completed run and the artifacts it wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub files: Vec<PathBuf>,
}

/// Everything a scenario produces before it touches the disk.
struct Artifacts {
    verdict: Verdict,
    series: String,
    extra: Vec<(&'static str, String)>,
    summary: serde_json::Value,
    frames: Vec<String>,
}

impl Artifacts {
    fn new(verdict: Verdict, series: String) -> Self {
        Artifacts { verdict, series, extra: Vec::new(), summary: json!({}), frames: Vec::new() }
    }
}

/// Run one validated scenario and write its artifacts into `out_dir`:
/// `series.csv`, `verdict.json`, `summary.json`, scenario-specific CSVs and,
/// when requested, `frames/frame_NNNN.svg`.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let art = match config.scenario {
        ScenarioKind::CsfPair | ScenarioKind::Custom => run_csf_pair(config)?,
        ScenarioKind::CsfSelf => run_csf_self(config)?,
        ScenarioKind::GraphicalPair => run_graphical(config)?,
        ScenarioKind::MarriageRing => run_ring(config)?,
        ScenarioKind::Dumbbell => run_dumbbell(config)?,
        ScenarioKind::ConeFattening => run_cone(config)?,
        ScenarioKind::Localizability => run_localizability(config)?,
    };
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut write = |name: &str, body: &str| -> Result<()> {
        let p = out_dir.join(name);
        fs::write(&p, body)?;
        files.push(p);
        Ok(())
    };
    write("series.csv", &art.series)?;
    for (name, body) in &art.extra {
        write(name, body)?;
    }
    let mut summary = art.summary;
    summary["config"] = serde_json::to_value(config).expect("config serializes");
    write("summary.json", &serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    write("verdict.json", &art.verdict.to_json_pretty())?;
    if !art.frames.is_empty() {
        fs::create_dir_all(out_dir.join("frames"))?;
        for (k, f) in art.frames.iter().enumerate() {
            write(&format!("frames/frame_{k:04}.svg"), f)?;
        }
    }
    Ok(RunOutcome { verdict: art.verdict, files })
}

fn opts(config: &ScenarioConfig) -> MonitorOptions {
    MonitorOptions { record_frames: config.emit_frames }
}

fn run_csf_pair(config: &ScenarioConfig) -> Result<Artifacts> {
    let h = config.h();
    let (a, b, oracle) = if config.scenario == ScenarioKind::Custom {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let a = shapes::random_smooth(&mut rng, Vec2::new(-0.4, 0.0), 1.0, 4096);
        let b = shapes::random_smooth(&mut rng, Vec2::new(0.4, 0.0), 1.0, 4096);
        (resample(&a, h)?, resample(&b, h)?, None)
    } else {
        let name = config.pair.as_deref().unwrap_or("two_circles");
        let entry = csf_pair(name).ok_or_else(|| Error::Config(format!("pair '{name}' is not in the pair catalog")))?;
        (entry.a.polyline(h)?, entry.b.polyline(h)?, entry.exact_separation_time())
    };
    let (series, mut verdict) = run_pair_monitor(&a, &b, config.horizon, config.sample_dt, opts(config))?;
    verdict.scenario = config.scenario.as_str().to_string();
    let mut art = Artifacts::new(verdict, series.to_csv());
    art.summary = json!({
        "pair": config.pair,
        "seed": config.seed,
        "vertices": [a.len(), b.len()],
        "exact_separation_time": oracle,
        "t0_detected": series.t0_detected,
    });
    art.frames = series.svg_frames();
    Ok(art)
}

fn run_csf_self(config: &ScenarioConfig) -> Result<Artifacts> {
    let dense = match config.curve.unwrap_or(SelfCurve::FigureEight) {
        SelfCurve::Circle => shapes::circle(Vec2::ZERO, 1.0, 4096),
        SelfCurve::FigureEight => shapes::figure_eight(1.0, 4096),
        SelfCurve::ThreeCrossing => shapes::trefoil(0.3, 4096),
    };
    // resampling by arclength keeps the half-step offset away from crossings
    let c = resample(&dense, config.h())?;
    let (series, verdict) = run_self_monitor(&c, config.horizon, config.sample_dt, opts(config))?;
    let mut art = Artifacts::new(verdict, series.to_csv());
    art.summary = json!({ "curve": config.curve, "vertices": c.len(), "t0_detected": series.t0_detected });
    art.frames = series.svg_frames();
    Ok(art)
}

/// `u = 0` against `v = x² - 1/4` on `(-1, 1)`.
fn run_graphical(config: &ScenarioConfig) -> Result<Artifacts> {
    let h = config.h();
    let nx = (2.0 / h).round() as usize + 1;
    let h = 2.0 / (nx - 1) as f64;
    let u = ScalarField2D::line(nx, h, -1.0, |_| 0.0)?;
    let v = ScalarField2D::line(nx, h, -1.0, |x| x * x - 0.25)?;
    let records = evolve_pair_and_track_nodal(&GraphPair::new(u, v)?, config.horizon, config.sample_dt)?;
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let counts: Vec<usize> = records.iter().map(|r| r.n_points).collect();
    let mut verdict = Verdict::new("graphical_pair");
    let scan = scan_nonincreasing(&counts_as_values(&counts), 0.0);
    verdict.monotone_count = Some(scan.monotone);
    if let Some(k) = scan.violation {
        verdict.note(Some(k), Some(times[k]), "nodal point count increased");
    }
    for &k in &scan.forgiven {
        verdict.note(Some(k), Some(times[k]), "single-sample nodal count increase forgiven");
    }
    verdict.t0_detected = first_empty_time(&times, &counts);
    verdict.tolerance("h", h);
    verdict.tolerance("cfl", crate::graphical::CFL);
    let mut series = format!("{}\n", NodalRecord::CSV_HEADER);
    for r in &records {
        series.push_str(&r.csv_row());
        series.push('\n');
    }
    let mut art = Artifacts::new(verdict, series);
    art.summary = json!({ "nodes": nx, "t0_detected": first_empty_time(&times, &counts) });
    Ok(art)
}

fn run_ring(config: &ScenarioConfig) -> Result<Artifacts> {
    let n = config.n.unwrap_or(2);
    let vertices = (MarriageRing::new(n)?.perimeter() / config.h()).round() as usize;
    let state = marriage_ring_profile_with(n, vertices)?;
    let series = ring_intersection_series(&state, config.horizon, config.sample_dt, config.emit_frames)?;
    let mut art = Artifacts::new(series.verdict.clone(), series.to_csv());
    art.summary = json!({
        "vertices": vertices,
        "initial_rate": series.initial_rate,
        "delta": series.delta,
        "increasing_until_delta": series.increasing_until_delta(),
        "topology_change": series.topology_change,
    });
    art.frames = series.frames;
    Ok(art)
}

fn run_dumbbell(config: &ScenarioConfig) -> Result<Artifacts> {
    let l = config.length.unwrap_or(super::DUMBBELL_DEFAULT_L);
    let eps = config.eps.unwrap_or(super::DUMBBELL_DEFAULT_EPS);
    let state = dumbbell_profile_with(l, eps, config.h())?;
    let plane_z = dumbbell_plane_height(eps, dumbbell_delta(eps, state.n));
    let series = dumbbell_component_series(&state, l, plane_z, config.horizon, config.sample_dt, config.emit_frames)?;
    let mut art = Artifacts::new(series.verdict.clone(), series.to_csv());
    art.summary = json!({
        "plane_z": plane_z,
        "split_t": series.split_t,
        "pinch_t": series.pinch_t,
        "barrier_held": series.barrier_held,
    });
    art.frames = series.frames;
    Ok(art)
}

fn cone_setup(config: &ScenarioConfig) -> ConeSetup {
    let d = ConeSetup::default();
    ConeSetup {
        aperture_deg: config.aperture_deg.unwrap_or(d.aperture_deg),
        plane_offset: config.plane_offset.unwrap_or(d.plane_offset),
        h: config.h(),
        track_mode: config.tracking.unwrap_or(d.track_mode),
        reinit_every: config.reinit_every.unwrap_or(d.reinit_every),
        ..d
    }
}

fn zero_set_svg(cs: &[Contour], title: &str) -> String {
    let strokes: Vec<Stroke> = cs
        .iter()
        .enumerate()
        .map(|(k, c)| Stroke { points: c.points.clone(), closed: c.closed, color: svg::palette(k) })
        .collect();
    svg::render(&strokes, &[], title)
}

fn run_cone(config: &ScenarioConfig) -> Result<Artifacts> {
    let setup = cone_setup(config);
    let series = cone_intersection_scenario(&setup, config.horizon, config.sample_dt)?;
    let mut art = Artifacts::new(series.verdict.clone(), series.to_csv());
    art.extra.push(("fattening.csv", series.fattening_csv()));
    let mut radii = String::from("t,r\n");
    for (s, r) in series.samples.iter().zip(&series.radii) {
        radii.push_str(&format!("{},{}\n", s.t, r.map_or(String::new(), |r| r.to_string())));
    }
    art.extra.push(("radii.csv", radii));
    art.summary = json!({
        "scaling_ratios": series.scaling_ratios(),
        "scaling_spread": series.scaling_spread(),
        "fattening": series.fattening(),
    });
    if config.emit_frames {
        let s = series.final_state.primary();
        art.frames.push(zero_set_svg(&s.zero_set(), &format!("t = {}", s.t)));
    }
    Ok(art)
}

/// Level set to split, the cutting region and the time the split happens.
fn split_setup(config: &ScenarioConfig) -> Result<(LevelSetState, Region)> {
    let h = config.h();
    let reinit = config.reinit_every.unwrap_or(crate::levelset::REINIT_EVERY);
    let (mut state, region) = match config.split.unwrap_or(Split::Circles) {
        Split::Dumbbell => {
            let l = SPLIT_DUMBBELL_L;
            let mut s = dumbbell_state(l, super::DUMBBELL_DEFAULT_EPS, h)?;
            s.reinit_every = reinit;
            // evolve in sample steps until the neck has pinched
            let mut k = 1;
            while zero_set_components(&s) < 2 {
                let t = k as f64 * config.sample_dt;
                if t > config.horizon {
                    return Err(Error::InsufficientSamples("dumbbell did not pinch within the horizon".into()));
                }
                s = evolve_until(s, t)?;
                k += 1;
            }
            let region = Region::Disk { centre: [4.0 * l, 0.0], radius: 4.0 * l - 0.5 };
            (s, region)
        }
        Split::Circles => {
            let n = (3.0 / h).round() as usize + 1;
            let m = (2.0 / h).round() as usize + 1;
            let phi = ScalarField2D::from_fn(n, m, h, Vec2::new(-1.5, -1.0), |p| {
                (p.dist(Vec2::new(-0.7, 0.0)) - 0.5).min(p.dist(Vec2::new(0.7, 0.0)) - 0.5)
            })?;
            let region = Region::HalfPlane { point: [0.0, 0.0], normal: [1.0, 0.0] };
            (LevelSetState::new(phi, LsMode::Planar)?, region)
        }
        Split::Cone => {
            let s = double_cone_state(&cone_setup(config))?;
            let region = Region::HalfPlane { point: [0.0, 0.0], normal: [0.0, 1.0] };
            (s, region)
        }
    };
    state.reinit_every = reinit;
    Ok((state, region))
}

fn run_localizability(config: &ScenarioConfig) -> Result<Artifacts> {
    let split = config.split.unwrap_or(Split::Circles);
    let (state, region) = split_setup(config)?;
    let t0 = state.t;
    let remaining = config.horizon - t0;
    if remaining < config.sample_dt {
        return Err(Error::InsufficientSamples("no time left after the split".into()));
    }
    let report = localizability_check(&state, &region, remaining, config.sample_dt)?;
    let mut verdict = report.verdict.clone();
    verdict.scenario = format!("localizability_{}", split.as_str());
    verdict.tolerance("split_time", t0);
    let mut art = Artifacts::new(verdict, report.to_csv());
    art.summary = json!({
        "split": split,
        "split_time": t0,
        "passes": report.passes,
        "boundary_crossings": report.crossings.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
    });
    if config.emit_frames {
        art.frames.push(zero_set_svg(&state.zero_set(), &format!("split at t = {t0}")));
    }
    Ok(art)
}

/// Curves of a `csf_pair` catalog entry, for callers that run the monitor
/// themselves.
pub fn pair_curves(name: &str, h: f64) -> Result<(Polyline, Polyline)> {
    let entry = csf_pair(name).ok_or_else(|| Error::Config(format!("pair '{name}' is not in the pair catalog")))?;
    Ok((entry.a.polyline(h)?, entry.b.polyline(h)?))
}
