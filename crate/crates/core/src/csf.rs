//! Parametric curve shortening flow with intersection monitors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::intersect::{polyline_intersections, sampling_scale, self_intersections};
use crate::geometry::polyline::{menger_curvature, resample};
use crate::geometry::{IntersectionSample, PointCloud, Polyline, SampleScales, Vec2};
use crate::svg::{self, Stroke};
use crate::verdict::{counts_as_values, first_empty_time, scan_nonincreasing, Verdict};

/// Explicit Euler stability factor: `dt <= CFL * h^2`.
pub const CFL: f64 = 0.25;
/// Edge-length ratio above which the curve is resampled.
pub const MAX_EDGE_RATIO: f64 = 10.0;
/// A run stops when `max |κ| · h_min` exceeds this (curvature singularity).
pub const SINGULARITY_KH: f64 = 0.5;

/// A curve evolving by curve shortening flow.
#[derive(Debug, Clone, PartialEq)]
pub struct CsfState {
    pub curve: Polyline,
    pub t: f64,
    pub alive: bool,
    /// Resampling target, fixed at creation.
    pub h_target: f64,
}

impl CsfState {
    pub fn new(curve: Polyline) -> Self {
        let h_target = sampling_scale(&curve);
        CsfState { curve, t: 0.0, alive: true, h_target }
    }

    pub fn with_target(curve: Polyline, h_target: f64) -> Self {
        CsfState { curve, t: 0.0, alive: true, h_target }
    }

    /// Largest stable step for the current curve.
    pub fn max_dt(&self) -> f64 {
        CFL * self.curve.min_edge().powi(2)
    }
}

/// Curvature vector `κ N` at every vertex; zero at open-curve endpoints.
///
/// `N` is the left normal of the neighbour chord, so `κ N` points towards
/// the centre of the Menger circle whatever the orientation.
pub fn curvature_vectors(curve: &Polyline) -> Vec<Vec2> {
    (0..curve.len())
        .map(|i| match curve.triple(i) {
            Some((a, b, c)) => (c - a).perp().normalized() * menger_curvature(a, b, c),
            None => Vec2::ZERO,
        })
        .collect()
}

/// One explicit step of curve shortening flow.
///
/// Open curves keep their endpoints. The curve is resampled at `h_target`
/// when its edge ratio exceeds 10 or its shortest edge falls below half the
/// target. The state dies when it becomes too small (see [`is_extinct`]) or a
/// curvature singularity forms.
pub fn step_csf(state: &CsfState, dt: f64) -> Result<CsfState> {
    step_csf_with_ends(state, dt, None)
}

/// [`step_csf`] with endpoint positions for open curves imposed at the new
/// time.
pub fn step_csf_with_ends(state: &CsfState, dt: f64, ends: Option<(Vec2, Vec2)>) -> Result<CsfState> {
    if !state.alive {
        return Err(Error::Extinct);
    }
    let limit = state.max_dt();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    let v = curvature_vectors(&state.curve);
    let mut pts: Vec<Vec2> = state.curve.vertices().iter().zip(&v).map(|(&p, &k)| p + k * dt).collect();
    if let (Some((a, b)), false) = (ends, state.curve.is_closed()) {
        pts[0] = a;
        let last = pts.len() - 1;
        pts[last] = b;
    }
    let t = state.t + dt;
    let dead = |curve| CsfState { curve, t, alive: false, h_target: state.h_target };
    let mut curve = match Polyline::new(pts, state.curve.is_closed()) {
        Ok(c) => c,
        Err(_) => return Ok(dead(state.curve.clone())),
    };
    let (lo, hi) = curve.edge_extremes();
    if hi / lo > MAX_EDGE_RATIO || lo < 0.5 * state.h_target {
        match resample(&curve, state.h_target) {
            Ok(c) if c.len() >= 8 || !c.is_closed() => curve = c,
            _ => return Ok(dead(curve)),
        }
    }
    let alive = !is_extinct(&curve, state.h_target) && !is_singular(&curve);
    Ok(CsfState { curve, t, alive, h_target: state.h_target })
}

/// Length at most `10 h`, or, for curves with nonzero turning number,
/// enclosed area below `(10 h)^2`. Immersed curves with turning number 0
/// enclose no signed area and are judged by length alone.
pub fn is_extinct(curve: &Polyline, h: f64) -> bool {
    if curve.length() <= 10.0 * h {
        return true;
    }
    // the area test is far cheaper than the turning number, so it goes first
    curve.is_closed() && curve.signed_area().abs() < (10.0 * h).powi(2) && curve.turning_number() != 0
}

/// `max |κ| · h_min > 0.5`: the polygon no longer resolves the curvature.
pub fn is_singular(curve: &Polyline) -> bool {
    let kmax = (0..curve.len())
        .filter_map(|i| curve.triple(i).map(|(a, b, c)| menger_curvature(a, b, c)))
        .fold(0.0f64, f64::max);
    kmax * curve.min_edge() > SINGULARITY_KH
}

/// Advance to time `t_end` (or until extinction) with maximal stable steps.
pub fn evolve_until(mut state: CsfState, t_end: f64) -> Result<CsfState> {
    while state.alive && state.t < t_end {
        let dt = state.max_dt().min(t_end - state.t);
        state = step_csf(&state, dt)?;
        if t_end - state.t < 1e-14 {
            state.t = t_end;
        }
    }
    Ok(state)
}

/// Sampled intersection history of a monitored run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorSeries {
    pub samples: Vec<IntersectionSample>,
    pub t0_detected: Option<f64>,
    /// Curves at each sample, kept only when frames were requested.
    #[serde(skip)]
    pub frames: Vec<Vec<Polyline>>,
}

impl MonitorSeries {
    pub fn counts(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.components).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(IntersectionSample::CSV_HEADER);
        s.push('\n');
        for sample in &self.samples {
            s.push_str(&sample.csv_row());
            s.push('\n');
        }
        s
    }

    /// One SVG document per recorded frame.
    pub fn svg_frames(&self) -> Vec<String> {
        self.frames
            .iter()
            .zip(&self.samples)
            .map(|(curves, sample)| {
                let strokes: Vec<Stroke> = curves
                    .iter()
                    .enumerate()
                    .map(|(k, c)| Stroke {
                        points: c.vertices().to_vec(),
                        closed: c.is_closed(),
                        color: svg::palette(k),
                    })
                    .collect();
                svg::render(&strokes, sample.points.points(), &format!("t = {}", sample.t))
            })
            .collect()
    }
}

/// Options shared by the CSF monitors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonitorOptions {
    pub record_frames: bool,
}

fn sample_times(t_end: f64, sample_dt: f64) -> Vec<f64> {
    let n = (t_end / sample_dt + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * sample_dt).collect()
}

fn count_verdict(verdict: &mut Verdict, series: &MonitorSeries, what: &str) {
    let counts = series.counts();
    let scan = scan_nonincreasing(&counts_as_values(&counts), 0.0);
    verdict.monotone_count = Some(scan.monotone);
    for &k in &scan.forgiven {
        verdict.note(
            Some(k),
            Some(series.samples[k].t),
            format!("single-sample {what} increase forgiven (tangency flicker)"),
        );
    }
    if let Some(k) = scan.violation {
        verdict.note(Some(k), Some(series.samples[k].t), format!("{what} increased"));
    }
    let dims: Vec<Option<f64>> = series.samples.iter().map(|s| s.dim_est).collect();
    let dscan = scan_nonincreasing(&dims, 0.2);
    verdict.monotone_dim = Some(dscan.monotone);
    if let Some(k) = dscan.violation {
        verdict.note(Some(k), Some(series.samples[k].t), "dimension estimate increased");
    }
    // flag samples where the count changes: the one-sided counts bracket a
    // tangency somewhere in between
    for k in 1..counts.len() {
        if counts[k] != counts[k - 1] {
            verdict.note(
                Some(k),
                Some(series.samples[k].t),
                format!("{what} {} -> {} since previous sample", counts[k - 1], counts[k]),
            );
        }
    }
    verdict.tolerance("count_increase_tol", 0.0);
    verdict.tolerance("dim_increase_tol", 0.2);
    verdict.tolerance("transient_samples_forgiven", 1.0);
}

/// Evolve two curves on a shared clock and record their intersections every
/// `sample_dt` up to `t_end`.
pub fn run_pair_monitor(
    a0: &Polyline,
    b0: &Polyline,
    t_end: f64,
    sample_dt: f64,
    opts: MonitorOptions,
) -> Result<(MonitorSeries, Verdict)> {
    if a0 == b0 {
        return Err(Error::IdenticalInputs);
    }
    if !a0.is_closed() || !b0.is_closed() {
        return Err(Error::InvalidPolyline("monitors need closed curves".into()));
    }
    let mut a = CsfState::new(a0.clone());
    let mut b = CsfState::new(b0.clone());
    let h = a.h_target.min(b.h_target);
    let scales = SampleScales::for_resolution(h);
    let mut series = MonitorSeries { samples: Vec::new(), t0_detected: None, frames: Vec::new() };
    let mut ended_early = None;
    for ts in sample_times(t_end, sample_dt) {
        while a.t < ts && (a.alive || b.alive) {
            let mut dt = ts - a.t;
            if a.alive {
                dt = dt.min(a.max_dt());
            }
            if b.alive {
                dt = dt.min(b.max_dt());
            }
            let t_next = a.t + dt;
            a = if a.alive { step_csf(&a, dt)? } else { CsfState { t: t_next, ..a } };
            b = if b.alive { step_csf(&b, dt)? } else { CsfState { t: t_next, ..b } };
            if (ts - a.t).abs() < 1e-13 {
                a.t = ts;
                b.t = ts;
            }
        }
        if !a.alive && !b.alive {
            ended_early = Some(ts);
            break;
        }
        let cloud = if a.alive && b.alive { polyline_intersections(&a.curve, &b.curve) } else { PointCloud::empty(1) };
        series.samples.push(IntersectionSample::from_cloud(ts, cloud, &scales)?);
        if opts.record_frames {
            series.frames.push([&a, &b].iter().filter(|s| s.alive).map(|s| s.curve.clone()).collect());
        }
    }
    series.t0_detected = first_empty_time(&series.times(), &series.counts());
    let mut verdict = Verdict::new("csf_pair");
    count_verdict(&mut verdict, &series, "intersection count");
    verdict.t0_detected = series.t0_detected;
    if let Some(t) = ended_early {
        verdict.note(None, Some(t), "both curves extinct; series ends");
    }
    verdict.tolerance("link_r", scales.link_r);
    verdict.tolerance("dedup_r", h / 4.0);
    verdict.tolerance("tol_touch", h / 2.0);
    verdict.tolerance("cfl", CFL);
    Ok((series, verdict))
}

/// Evolve one (possibly immersed) curve and record its self-intersections.
pub fn run_self_monitor(
    c0: &Polyline,
    t_end: f64,
    sample_dt: f64,
    opts: MonitorOptions,
) -> Result<(MonitorSeries, Verdict)> {
    let mut c = CsfState::new(c0.clone());
    let scales = SampleScales::for_resolution(c.h_target);
    let mut series = MonitorSeries { samples: Vec::new(), t0_detected: None, frames: Vec::new() };
    let mut ended = None;
    for ts in sample_times(t_end, sample_dt) {
        while c.alive && c.t < ts {
            let dt = (ts - c.t).min(c.max_dt());
            c = step_csf(&c, dt)?;
            if (ts - c.t).abs() < 1e-13 {
                c.t = ts;
            }
        }
        if !c.alive {
            ended = Some(c.t);
            break;
        }
        let cloud = self_intersections(&c.curve);
        series.samples.push(IntersectionSample::from_cloud(ts, cloud, &scales)?);
        if opts.record_frames {
            series.frames.push(vec![c.curve.clone()]);
        }
    }
    series.t0_detected = first_empty_time(&series.times(), &series.counts());
    let mut verdict = Verdict::new("csf_self");
    count_verdict(&mut verdict, &series, "self-intersection count");
    let counts = series.counts();
    if let Some(z) = counts.iter().position(|&k| k == 0) {
        if let Some(k) = (z..counts.len()).find(|&k| counts[k] > 0) {
            verdict.note(Some(k), Some(series.samples[k].t), "embeddedness lost after reaching 0");
        }
    }
    verdict.t0_detected = series.t0_detected;
    if let Some(t) = ended {
        verdict.note(None, Some(t), "run stopped at extinction or curvature singularity");
    }
    verdict.tolerance("link_r", scales.link_r);
    verdict.tolerance("cfl", CFL);
    verdict.tolerance("singularity_kh", SINGULARITY_KH);
    Ok((series, verdict))
}
