//! Dumbbell: two round bells joined by a thin cylindrical neck, rotated
//! about the x-axis. A horizontal plane just below the neck radius meets the
//! surface in one closed curve; once the neck thins, it meets it in two.

use serde::Serialize;

use super::{evolve_until, Axis, AxisymState, End};
use crate::error::{Error, Result};
use crate::geometry::{resample, Polyline, Vec2};
use crate::verdict::{counts_as_values, scan_nonincreasing, Verdict};

/// Hypersurface dimension of the dumbbell.
pub const DUMBBELL_N: usize = 2;

fn smoothstep5(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// Bell height: the profile reaches `L + 2` at the bell centres `±4L`.
fn bell_height(l: f64) -> f64 {
    l + 2.0
}

/// Even profile function on `[-5L-10, 5L+10]`: equal to `eps` on the neck
/// `[-L, L]`, rising smoothly to the bells on `[L, 4L]`, then a half-ellipse
/// closing at the poles `±(5L+10)`.
pub fn dumbbell_f(x: f64, l: f64, eps: f64) -> f64 {
    let x = x.abs();
    let a = bell_height(l);
    let end = 5.0 * l + 10.0;
    if x <= l {
        eps
    } else if x <= 4.0 * l {
        eps + (a - eps) * smoothstep5((x - l) / (3.0 * l))
    } else if x < end {
        let u = (x - 4.0 * l) / (l + 10.0);
        a * (1.0 - u * u).max(0.0).sqrt()
    } else {
        0.0
    }
}

/// Dumbbell profile with vertex spacing `eps / 10`, from pole to pole, in
/// meridian coordinates `(r, z) = (f(x), x)`.
pub fn dumbbell_profile(l: f64, eps: f64) -> Result<AxisymState> {
    dumbbell_profile_with(l, eps, eps / 10.0)
}

/// As [`dumbbell_profile`] with vertex spacing `h`.
pub fn dumbbell_profile_with(l: f64, eps: f64, h: f64) -> Result<AxisymState> {
    if !(l > 0.0 && eps > 0.0 && eps < l / 10.0) {
        return Err(Error::InfeasibleProfile(format!("need 0 < eps < L/10, got eps = {eps}, L = {l}")));
    }
    if !(h > 0.0 && h <= eps / 2.0) {
        return Err(Error::InfeasibleProfile(format!("vertex spacing {h} does not resolve the neck")));
    }
    let end = 5.0 * l + 10.0;
    // dense graph sampling, refined towards the poles where f is steep
    let fine = ((2.0 * end / (h / 8.0)).ceil() as usize).max(64);
    let pts: Vec<Vec2> = (0..=fine)
        .map(|k| {
            let s = -1.0 + 2.0 * k as f64 / fine as f64;
            // x = end·sin(πs/2) clusters nodes near the poles
            let x = end * (std::f64::consts::FRAC_PI_2 * s).sin();
            let r = if k == 0 || k == fine { 0.0 } else { dumbbell_f(x, l, eps) };
            Vec2::new(r, x)
        })
        .collect();
    let profile = resample(&Polyline::open(pts)?, h)?;
    let mut state = AxisymState::new(profile, DUMBBELL_N, Axis::X, [End::Pole, End::Pole], true)?;
    state.h_target = h;
    Ok(state)
}

/// Smooth-run horizon used for the plane height: 80% of the neck's
/// cylinder extinction time `eps² / (2 (n-1))`.
pub fn dumbbell_delta(eps: f64, n: usize) -> f64 {
    0.8 * eps * eps / (2.0 * (n - 1) as f64)
}

/// Plane height `sqrt(1 - δ/2) · eps`.
pub fn dumbbell_plane_height(eps: f64, delta: f64) -> f64 {
    (1.0 - 0.5 * delta).max(0.0).sqrt() * eps
}

/// Axial intervals `[x_lo, x_hi]` over which the profile radius is at least
/// `plane_z`. Each one revolves into one closed curve of the plane section.
pub fn plane_components(state: &AxisymState, plane_z: f64) -> Vec<(f64, f64)> {
    let v = state.profile.vertices();
    let cross = |a: Vec2, b: Vec2| a.y + (b.y - a.y) * (plane_z - a.x) / (b.x - a.x);
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for i in 0..v.len() {
        let above = v[i].x >= plane_z;
        match (above, start) {
            (true, None) => start = Some(if i == 0 { v[0].y } else { cross(v[i - 1], v[i]) }),
            (false, Some(s)) => {
                out.push((s, cross(v[i - 1], v[i])));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, v[v.len() - 1].y));
    }
    out
}

/// Closed curves of the section by the plane at height `plane_z`, in plane
/// coordinates `(x, y)`: points with `y² + plane_z² = r(x)²`.
pub fn plane_section(state: &AxisymState, plane_z: f64) -> Vec<Vec<Vec2>> {
    let v = state.profile.vertices();
    plane_components(state, plane_z)
        .into_iter()
        .map(|(lo, hi)| {
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            let mut upper: Vec<Vec2> = v
                .iter()
                .filter(|p| p.y > lo && p.y < hi && p.x >= plane_z)
                .map(|p| Vec2::new(p.y, (p.x * p.x - plane_z * plane_z).sqrt()))
                .collect();
            upper.sort_by(|a, b| a.x.total_cmp(&b.x));
            let mut curve = vec![Vec2::new(lo, 0.0)];
            curve.extend(upper.iter().copied());
            curve.push(Vec2::new(hi, 0.0));
            curve.extend(upper.iter().rev().map(|p| Vec2::new(p.x, -p.y)));
            curve
        })
        .collect()
}

/// Profile radius at `z = 0` (the neck), by interpolation.
fn neck_radius(state: &AxisymState) -> Option<f64> {
    let v = state.profile.vertices();
    v.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        ((a.y <= 0.0) != (b.y <= 0.0)).then(|| a.x + (b.x - a.x) * (0.0 - a.y) / (b.y - a.y))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DumbbellSample {
    pub t: f64,
    pub components: usize,
    pub neck_r: f64,
    /// Smallest `dist(vertex, bell centre) - sqrt(L² - 4t)` over both bells;
    /// negative means the exact comparison sphere pokes out of the surface.
    pub barrier_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumbbellSeries {
    pub samples: Vec<DumbbellSample>,
    pub plane_z: f64,
    /// First sample with at least two components.
    pub split_t: Option<f64>,
    /// Time the neck reached the axis, if it did.
    pub pinch_t: Option<f64>,
    pub barrier_held: bool,
    pub verdict: Verdict,
    pub frames: Vec<String>,
}

impl DumbbellSeries {
    pub const CSV_HEADER: &'static str = "t,components,neck_r,barrier_margin";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.samples {
            s.push_str(&format!("{},{},{},{}\n", r.t, r.components, r.neck_r, r.barrier_margin));
        }
        s
    }

    pub fn split(&self) -> bool {
        self.samples.first().is_some_and(|s| s.components == 1) && self.split_t.is_some()
    }

    pub fn component_at(&self, t: f64) -> Option<usize> {
        self.samples.iter().find(|s| (s.t - t).abs() < 1e-9).map(|s| s.components)
    }
}

/// Evolve the dumbbell, counting the components of its section by the plane
/// at height `plane_z`, and checking that the bells keep enclosing the
/// shrinking spheres of radius `sqrt(L² - 4t)` about `(±4L, 0)`.
pub fn dumbbell_component_series(
    state0: &AxisymState,
    l: f64,
    plane_z: f64,
    t_end: f64,
    sample_dt: f64,
    frames: bool,
) -> Result<DumbbellSeries> {
    let h = state0.h_target;
    let tol = 3.0 * h;
    let count = (t_end / sample_dt + 1e-9).floor() as usize;
    let mut state = state0.clone();
    let mut samples: Vec<DumbbellSample> = Vec::new();
    let mut pictures = Vec::new();
    let mut pinch_t = None;
    for k in 0..=count {
        let ts = k as f64 * sample_dt;
        state = match evolve_until(state.clone(), ts) {
            Ok(s) => s,
            Err(Error::AxisCollision { .. }) => {
                pinch_t = Some(ts);
                break;
            }
            Err(e) => return Err(e),
        };
        let sphere = (l * l - 4.0 * ts).max(0.0).sqrt();
        let margin = [-4.0 * l, 4.0 * l]
            .iter()
            .map(|&c| {
                let centre = Vec2::new(0.0, c);
                let d = state.profile.vertices().iter().map(|p| p.dist(centre)).fold(f64::INFINITY, f64::min);
                d - sphere
            })
            .fold(f64::INFINITY, f64::min);
        samples.push(DumbbellSample {
            t: ts,
            components: plane_components(&state, plane_z).len(),
            neck_r: neck_radius(&state).unwrap_or(0.0),
            barrier_margin: margin,
        });
        if frames {
            pictures.push(state.svg(&[]));
        }
    }
    let split_t = samples.iter().find(|s| s.components >= 2).map(|s| s.t);
    let barrier_held = samples.iter().all(|s| s.barrier_margin >= -tol);

    let mut verdict = Verdict::new("dumbbell");
    let counts: Vec<usize> = samples.iter().map(|s| s.components).collect();
    let scan = scan_nonincreasing(&counts_as_values(&counts), 0.0);
    verdict.monotone_count = Some(scan.monotone);
    if let Some(k) = samples.iter().position(|s| s.components >= 2) {
        verdict.note(
            Some(k),
            Some(samples[k].t),
            format!("component count increased from {} to {}", counts[0], counts[k]),
        );
    }
    match samples.iter().position(|s| s.barrier_margin < -tol) {
        Some(k) => verdict.note(Some(k), Some(samples[k].t), "sphere barrier violated"),
        None if !samples.is_empty() => verdict.note(None, None, "sphere barrier held"),
        None => {}
    }
    if let Some(t) = pinch_t {
        let msg = if split_t.is_none() { "pinch-first" } else { "neck pinched; series ends" };
        verdict.note(None, Some(t), msg);
    }
    verdict.tolerance("plane_z", plane_z);
    verdict.tolerance("barrier", tol);
    verdict.tolerance("h", h);
    verdict.tolerance("cfl", super::CFL);
    Ok(DumbbellSeries { samples, plane_z, split_t, pinch_t, barrier_held, verdict, frames: pictures })
}
