//! Grid level set flow by mean curvature, planar or in a meridian half-plane.
//!
//! `phi` is an approximate signed distance, negative inside the evolving
//! region. Meridian grids are cell-centred in the radial direction, so the
//! first row of nodes sits at `r = h/2` and clamping at the axis is the even
//! reflection of `phi`.

pub mod cone;
mod localize;
mod track;

pub use cone::{cone_intersection_scenario, double_cone_state, ConeSeries};
pub use localize::{localizability_check, LocalizabilityReport, LocalizeSample, Region};
pub use track::{
    fattening_report, fattening_series, track_inner_outer, FatteningReport, FatteningSeries, FatteningVerdict,
    InnerOuter, InnerOuterTrack, TrackMode, THIN_TOL_FACTOR,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axisym::Axis;
use crate::error::{Error, Result};
use crate::geometry::{contours, Contour, ScalarField2D, Vec2};

/// Explicit step factor: `dt <= CFL * h^2`.
pub const CFL: f64 = 0.2;
/// Floor on `|∇phi|` in the curvature quotient.
pub const GRAD_FLOOR: f64 = 1e-8;
/// Steps between reinitializations.
pub const REINIT_EVERY: usize = 10;
/// Gauss-Seidel passes per reinitialization (each pass runs four orderings).
pub const REINIT_SWEEPS: usize = 2;
/// Only nodes with `|phi| <= NARROW_BAND * h` are updated; the others
/// hold distances refreshed at each reinitialization.
pub const NARROW_BAND: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LsMode {
    Planar,
    /// Meridian half-plane of a hypersurface of dimension `n` rotating
    /// about `axis`; the radial grid direction starts at `r = h/2`.
    Axisym {
        n: usize,
        axis: Axis,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetState {
    pub phi: ScalarField2D,
    pub t: f64,
    pub mode: LsMode,
    pub steps: usize,
    pub reinit_every: usize,
    /// Nodes whose gradient hit [`GRAD_FLOOR`] in the last step.
    pub flagged: usize,
}

impl LevelSetState {
    pub fn new(phi: ScalarField2D, mode: LsMode) -> Result<Self> {
        if phi.ny() < 8 {
            return Err(Error::InvalidField("level sets need a 2D grid".into()));
        }
        if let LsMode::Axisym { n, axis } = mode {
            if n < 2 {
                return Err(Error::InvalidField(format!("hypersurface dimension {n} < 2")));
            }
            let r0 = match axis {
                Axis::Y => phi.origin().x,
                Axis::X => phi.origin().y,
            };
            if (r0 - 0.5 * phi.h()).abs() > 1e-9 * phi.h() {
                return Err(Error::InvalidField("meridian grid must start at r = h/2".into()));
            }
        }
        Ok(LevelSetState { phi, t: 0.0, mode, steps: 0, reinit_every: REINIT_EVERY, flagged: 0 })
    }

    pub fn h(&self) -> f64 {
        self.phi.h()
    }

    pub fn max_dt(&self) -> f64 {
        CFL * self.h() * self.h()
    }

    /// Zero set of `phi`.
    pub fn zero_set(&self) -> Vec<Contour> {
        contours(&self.phi, 0.0)
    }

    /// Same state with `phi` shifted by `c` (positive shrinks the region).
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Ok(LevelSetState { phi: self.phi.map(|v| v + c)?, ..self.clone() })
    }
}

/// Grid for a meridian half-plane: `axial` is the range along the rotation
/// axis and `r_max` the radial extent; spacing `h`.
pub fn meridian_grid(axis: Axis, axial: (f64, f64), r_max: f64, h: f64) -> (usize, usize, Vec2) {
    let na = ((axial.1 - axial.0) / h).round() as usize + 1;
    let nr = (r_max / h).ceil() as usize;
    match axis {
        Axis::Y => (nr, na, Vec2::new(0.5 * h, axial.0)),
        Axis::X => (na, nr, Vec2::new(axial.0, 0.5 * h)),
    }
}

/// Mean curvature speed of the level sets at node `(i, j)`, with neighbours
/// clamped to the grid; returns the speed and whether the gradient floor
/// was used.
fn node_speed(f: &ScalarField2D, mode: LsMode, i: usize, j: usize) -> (f64, bool) {
    let (nx, ny, h) = (f.nx(), f.ny(), f.h());
    let (im, ip) = (i.saturating_sub(1), (i + 1).min(nx - 1));
    let (jm, jp) = (j.saturating_sub(1), (j + 1).min(ny - 1));
    let c = f.get(i, j);
    let (e, w, n, s) = (f.get(ip, j), f.get(im, j), f.get(i, jp), f.get(i, jm));
    let px = (e - w) / (2.0 * h);
    let py = (n - s) / (2.0 * h);
    let pxx = (e - 2.0 * c + w) / (h * h);
    let pyy = (n - 2.0 * c + s) / (h * h);
    let pxy = (f.get(ip, jp) - f.get(im, jp) - f.get(ip, jm) + f.get(im, jm)) / (4.0 * h * h);
    let g2 = px * px + py * py;
    let floored = g2 < GRAD_FLOOR * GRAD_FLOOR;
    let g2 = g2.max(GRAD_FLOOR * GRAD_FLOOR);
    let mut speed = (pxx * py * py - 2.0 * px * py * pxy + pyy * px * px) / g2;
    if let LsMode::Axisym { n, axis } = mode {
        let p = f.pos(i, j);
        let (r, pr) = match axis {
            Axis::Y => (p.x, px),
            Axis::X => (p.y, py),
        };
        speed += (n - 1) as f64 * pr / r;
    }
    (speed, floored)
}

/// One explicit step of `phi_t = |∇phi| div(∇phi/|∇phi|)` (plus the
/// rotational term in meridian mode) on the narrow band, reinitializing
/// every `reinit_every` steps. With reinitialization off the whole grid is
/// updated.
pub fn evolve_levelset(state: &LevelSetState, dt: f64) -> Result<LevelSetState> {
    let limit = state.max_dt();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    let f = &state.phi;
    let nx = f.nx();
    let band = if state.reinit_every > 0 { NARROW_BAND * f.h() } else { f64::INFINITY };
    let rows: Vec<(Vec<f64>, usize)> = (0..f.ny())
        .into_par_iter()
        .map(|j| {
            let mut flagged = 0;
            let row = (0..nx)
                .map(|i| {
                    let c = f.get(i, j);
                    if c.abs() > band {
                        return c;
                    }
                    let (v, fl) = node_speed(f, state.mode, i, j);
                    flagged += fl as usize;
                    c + dt * v
                })
                .collect();
            (row, flagged)
        })
        .collect();
    let flagged = rows.iter().map(|r| r.1).sum();
    let values: Vec<f64> = rows.into_iter().flat_map(|r| r.0).collect();
    let mut next = LevelSetState {
        phi: f.with_values(values)?,
        t: state.t + dt,
        steps: state.steps + 1,
        flagged,
        ..state.clone()
    };
    if next.reinit_every > 0 && next.steps.is_multiple_of(next.reinit_every) {
        next.phi = reinitialize(&next.phi)?;
    }
    Ok(next)
}

/// Advance to `t_end` with maximal stable steps.
pub fn evolve_until(mut state: LevelSetState, t_end: f64) -> Result<LevelSetState> {
    while state.t < t_end - 1e-15 {
        let dt = state.max_dt().min(t_end - state.t);
        state = evolve_levelset(&state, dt)?;
        if (state.t - t_end).abs() < 1e-13 {
            state.t = t_end;
        }
    }
    Ok(state)
}

/// Godunov update of `|∇d| = 1` from the smaller neighbours `a`, `b`.
fn eikonal(a: f64, b: f64, h: f64) -> f64 {
    if (a - b).abs() >= h {
        a.min(b) + h
    } else {
        0.5 * (a + b + (2.0 * h * h - (a - b) * (a - b)).sqrt())
    }
}

/// Unsigned distance from seeded values by fast sweeping. Seeds at or
/// below `fixed` are exact and left alone.
fn fast_sweep(d: &mut [f64], nx: usize, ny: usize, h: f64, sweeps: usize, fixed: f64) {
    for _ in 0..sweeps {
        for (rev_i, rev_j) in [(false, false), (true, false), (true, true), (false, true)] {
            for jj in 0..ny {
                let j = if rev_j { ny - 1 - jj } else { jj };
                let row = j * nx;
                for ii in 0..nx {
                    let i = if rev_i { nx - 1 - ii } else { ii };
                    let k = row + i;
                    if d[k] <= fixed {
                        continue;
                    }
                    let west = if i > 0 { d[k - 1] } else { f64::INFINITY };
                    let east = if i + 1 < nx { d[k + 1] } else { f64::INFINITY };
                    let south = if j > 0 { d[k - nx] } else { f64::INFINITY };
                    let north = if j + 1 < ny { d[k + nx] } else { f64::INFINITY };
                    let a = west.min(east);
                    let b = south.min(north);
                    let cand = if a.is_infinite() && b.is_infinite() {
                        continue;
                    } else if a.is_infinite() || b.is_infinite() {
                        a.min(b) + h
                    } else {
                        eikonal(a, b, h)
                    };
                    if cand < d[k] {
                        d[k] = cand;
                    }
                }
            }
        }
    }
}

/// Nodes within this many cells of a curve get exact distances; the rest
/// come from fast sweeping.
const EXACT_BAND: f64 = 6.0;

/// Exact distance to the segments of `curves` for nodes within
/// `EXACT_BAND` cells, infinity elsewhere.
fn near_distances(like: &ScalarField2D, curves: &[(Vec<Vec2>, bool)]) -> Vec<f64> {
    let (nx, ny, h) = (like.nx(), like.ny(), like.h());
    let o = like.origin();
    let reach = EXACT_BAND * h;
    let mut d = vec![f64::INFINITY; nx * ny];
    for (c, closed) in curves {
        let m = c.len();
        let segs = if *closed { m } else { m.saturating_sub(1) };
        for k in 0..segs {
            let (a, b) = (c[k], c[(k + 1) % m]);
            let lo = Vec2::new(a.x.min(b.x) - reach, a.y.min(b.y) - reach);
            let hi = Vec2::new(a.x.max(b.x) + reach, a.y.max(b.y) + reach);
            let i0 = (((lo.x - o.x) / h).floor().max(0.0) as usize).min(nx - 1);
            let i1 = (((hi.x - o.x) / h).ceil().max(0.0) as usize).min(nx - 1);
            let j0 = (((lo.y - o.y) / h).floor().max(0.0) as usize).min(ny - 1);
            let j1 = (((hi.y - o.y) / h).ceil().max(0.0) as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let dist = crate::geometry::polyline::point_segment_distance(like.pos(i, j), a, b);
                    let idx = j * nx + i;
                    if dist < d[idx] {
                        d[idx] = dist;
                    }
                }
            }
        }
    }
    for v in d.iter_mut() {
        if *v > reach {
            *v = f64::INFINITY;
        }
    }
    d
}

/// Replace `phi` by the signed distance to its zero set, keeping signs:
/// exact distance to the marching-squares contour near it, fast sweeping
/// farther out. A field without a sign change is returned unchanged.
pub fn reinitialize(f: &ScalarField2D) -> Result<ScalarField2D> {
    let zs: Vec<(Vec<Vec2>, bool)> = contours(f, 0.0).into_iter().map(|c| (c.points, c.closed)).collect();
    if zs.is_empty() {
        return Ok(f.clone());
    }
    let mut d = near_distances(f, &zs);
    fast_sweep(&mut d, f.nx(), f.ny(), f.h(), REINIT_SWEEPS, EXACT_BAND * f.h());
    let values = f.values().iter().zip(&d).map(|(&v, &dist)| if v < 0.0 { -dist } else { dist }).collect();
    f.with_values(values)
}

/// Signed distance to a set of open polylines on the grid of `like`:
/// exact near the curves, fast sweeping beyond; negative where `inside`
/// holds.
pub fn signed_distance(
    like: &ScalarField2D,
    curves: &[Vec<Vec2>],
    inside: impl Fn(Vec2) -> bool,
) -> Result<ScalarField2D> {
    let (nx, ny, h) = (like.nx(), like.ny(), like.h());
    let open: Vec<(Vec<Vec2>, bool)> = curves.iter().map(|c| (c.clone(), false)).collect();
    let mut d = near_distances(like, &open);
    fast_sweep(&mut d, nx, ny, h, REINIT_SWEEPS, EXACT_BAND * h);
    let values = (0..nx * ny)
        .map(|k| {
            let p = like.pos(k % nx, k / nx);
            if inside(p) {
                -d[k]
            } else {
                d[k]
            }
        })
        .collect();
    like.with_values(values)
}

/// Grid area of `{phi <= level}`, splitting each cell into two triangles
/// on which `phi` is linear.
pub fn area_below(f: &ScalarField2D, level: f64) -> f64 {
    let tri = |a: f64, b: f64, c: f64| {
        let mut v = [a - level, b - level, c - level];
        v.sort_by(f64::total_cmp);
        let [f0, f1, f2] = v;
        if f0 >= 0.0 {
            0.0
        } else if f2 <= 0.0 {
            1.0
        } else if f1 >= 0.0 {
            f0 * f0 / ((f1 - f0) * (f2 - f0))
        } else {
            1.0 - f2 * f2 / ((f2 - f1) * (f2 - f0))
        }
    };
    let half = 0.5 * f.h() * f.h();
    (0..f.ny() - 1)
        .into_par_iter()
        .map(|j| {
            (0..f.nx() - 1)
                .map(|i| {
                    let (a, b, c, d) = (f.get(i, j), f.get(i + 1, j), f.get(i + 1, j + 1), f.get(i, j + 1));
                    (tri(a, b, c) + tri(a, c, d)) * half
                })
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        // summed in row order so the result does not depend on thread count
        .iter()
        .sum()
}

/// Circle (or, in meridian mode, sphere centred on the axis) of radius `r`.
pub fn disk_state(r: f64, centre: Vec2, h: f64, half_width: f64, mode: LsMode) -> Result<LevelSetState> {
    let (nx, ny, origin) = match mode {
        LsMode::Planar => {
            let n = (2.0 * half_width / h).round() as usize + 1;
            (n, n, centre - Vec2::new(half_width, half_width))
        }
        LsMode::Axisym { axis, .. } => {
            let c = match axis {
                Axis::Y => centre.y,
                Axis::X => centre.x,
            };
            meridian_grid(axis, (c - half_width, c + half_width), half_width, h)
        }
    };
    let phi = ScalarField2D::from_fn(nx, ny, h, origin, |p| p.dist(centre) - r)?;
    LevelSetState::new(phi, mode)
}

/// Mean radius of the zero set about `centre`.
pub fn mean_radius(state: &LevelSetState, centre: Vec2) -> Option<f64> {
    let pts: Vec<Vec2> = state.zero_set().into_iter().flat_map(|c| c.points).collect();
    (!pts.is_empty()).then(|| pts.iter().map(|p| p.dist(centre)).sum::<f64>() / pts.len() as f64)
}

/// The dumbbell of the given neck radius rasterized in its meridian
/// (rotation about the x-axis, `n = 2`).
pub fn dumbbell_state(l: f64, eps: f64, h: f64) -> Result<LevelSetState> {
    let profile = crate::axisym::dumbbell_profile(l, eps)?;
    let picture = profile.picture();
    let end = 5.0 * l + 10.0;
    let pad = 1.0 + 2.0 * h;
    let (nx, ny, origin) = meridian_grid(Axis::X, (-end - pad, end + pad), l + 2.0 + pad, h);
    let like = ScalarField2D::new(nx, ny, h, origin, vec![0.0; nx * ny])?;
    let phi = signed_distance(&like, &[picture], |p| p.x.abs() < end && p.y < crate::axisym::dumbbell_f(p.x, l, eps))?;
    LevelSetState::new(phi, LsMode::Axisym { n: 2, axis: Axis::X })
}

/// Number of connected pieces of the zero set.
pub fn zero_set_components(state: &LevelSetState) -> usize {
    state.zero_set().len()
}

/// Points along contours, with extra points inserted so consecutive ones
/// are at most `spacing` apart.
pub fn densify(contours: &[Contour], spacing: f64) -> Vec<Vec2> {
    let mut out = Vec::new();
    for c in contours {
        let m = c.points.len();
        if m == 0 {
            continue;
        }
        let segs = if c.closed { m } else { m - 1 };
        out.push(c.points[0]);
        for k in 0..segs {
            let (a, b) = (c.points[k], c.points[(k + 1) % m]);
            let parts = (a.dist(b) / spacing).ceil().max(1.0) as usize;
            for s in 1..=parts {
                if c.closed && k + 1 == segs && s == parts {
                    break;
                }
                out.push(a.lerp(b, s as f64 / parts as f64));
            }
        }
    }
    out
}
