//! Rotationally symmetric mean curvature flow through meridian profiles.
//!
//! Profiles are stored in meridian coordinates `(r, z)`: `r` is the distance
//! to the rotation axis and `z` the position along it. [`Axis`] records how
//! these map back to the plane of the original picture.

mod dumbbell;
mod ring;

pub use dumbbell::{
    dumbbell_component_series, dumbbell_delta, dumbbell_f, dumbbell_plane_height, dumbbell_profile,
    dumbbell_profile_with, plane_components, plane_section, DumbbellSample, DumbbellSeries, DUMBBELL_N,
};
pub use ring::{
    marriage_ring_profile, marriage_ring_profile_with, mirror_crossings, ring_graph_patches, ring_intersection_series,
    ring_radii, MarriageRing, RingRadii, RingSample, RingSeries,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::polyline::{menger_curvature, resample};
use crate::geometry::{unit_sphere_area, Polyline, Vec2};
use crate::svg::{self, Stroke};

/// Explicit step factor: `dt <= CFL * h_min^2`.
pub const CFL: f64 = 0.25;
const MAX_EDGE_RATIO: f64 = 10.0;

/// Which axis of the picture plane the profile rotates about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Picture `(x, y) = (r, z)`.
    Y,
    /// Picture `(x, y) = (z, r)`.
    X,
}

impl Axis {
    pub fn to_picture(self, p: Vec2) -> Vec2 {
        match self {
            Axis::Y => p,
            Axis::X => Vec2::new(p.y, p.x),
        }
    }

    pub fn from_picture(self, p: Vec2) -> Vec2 {
        self.to_picture(p)
    }
}

/// How an endpoint of an open profile behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    /// On the axis; moves along it with speed `n κ`.
    Pole,
    /// Mirror-symmetric across the plane `z = const` through the endpoint,
    /// which keeps its `z`.
    Free,
}

/// Meridian profile of an `O(n) × O(1)`-invariant hypersurface.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymState {
    pub profile: Polyline,
    /// Hypersurface dimension (`n ≥ 2`).
    pub n: usize,
    pub t: f64,
    pub reflection_symmetric: bool,
    pub axis: Axis,
    /// Endpoint rules for open profiles; ignored when closed.
    pub ends: [End; 2],
    pub h_target: f64,
}

impl AxisymState {
    pub fn new(profile: Polyline, n: usize, axis: Axis, ends: [End; 2], reflection_symmetric: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidPolyline(format!("hypersurface dimension {n} < 2")));
        }
        let h_target = profile.mean_edge();
        let s = AxisymState { profile, n, t: 0.0, reflection_symmetric, axis, ends, h_target };
        s.check_axis()?;
        Ok(s)
    }

    fn is_pole(&self, i: usize) -> bool {
        !self.profile.is_closed()
            && ((i == 0 && self.ends[0] == End::Pole) || (i + 1 == self.profile.len() && self.ends[1] == End::Pole))
    }

    fn check_axis(&self) -> Result<()> {
        let tol = self.h_target / 10.0;
        for (i, p) in self.profile.vertices().iter().enumerate() {
            if !self.is_pole(i) && p.x < tol {
                return Err(Error::AxisCollision { index: i, r: p.x });
            }
        }
        Ok(())
    }

    pub fn max_dt(&self) -> f64 {
        CFL * self.profile.min_edge().powi(2)
    }

    /// Profile in picture coordinates.
    pub fn picture(&self) -> Vec<Vec2> {
        self.profile.vertices().iter().map(|&p| self.axis.to_picture(p)).collect()
    }

    /// SVG of the meridian section: the profile and its mirror image across
    /// the axis.
    pub fn svg(&self, markers: &[Vec2]) -> String {
        let mirror = |p: Vec2| self.axis.to_picture(Vec2::new(-p.x, p.y));
        let strokes = [
            Stroke { points: self.picture(), closed: self.profile.is_closed(), color: svg::palette(0) },
            Stroke {
                points: self.profile.vertices().iter().map(|&p| mirror(p)).collect(),
                closed: self.profile.is_closed(),
                color: svg::palette(0),
            },
        ];
        let marks: Vec<Vec2> = markers.iter().map(|&p| self.axis.to_picture(p)).collect();
        svg::render(&strokes, &marks, &format!("t = {}", self.t))
    }
}

/// Mean curvature vectors `H ν` at every vertex.
///
/// Away from the axis, `H N = (κ - (n-1) N_r / r) N` with `N` the left
/// normal of the neighbour chord, which is independent of orientation. Poles
/// use `n` times the curvature vector of the triple closed by the mirror
/// image of their neighbour.
pub fn mean_curvature_vectors(state: &AxisymState) -> Result<Vec<Vec2>> {
    Ok(curvature_terms(state)?.into_iter().map(|(nrm, c)| nrm * c).collect())
}

/// `(N, c)` per vertex with `H ν = c N`.
fn curvature_terms(state: &AxisymState) -> Result<Vec<(Vec2, f64)>> {
    state.check_axis()?;
    let v = state.profile.vertices();
    let m = v.len();
    let nm1 = (state.n - 1) as f64;
    let closed = state.profile.is_closed();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let (a, b, c) = if closed || (i > 0 && i + 1 < m) {
            state.profile.triple(i).expect("interior vertex")
        } else {
            let end = if i == 0 { state.ends[0] } else { state.ends[1] };
            let nb = if i == 0 { v[1] } else { v[m - 2] };
            let ghost = match end {
                End::Pole => Vec2::new(-nb.x, nb.y),
                End::Free => Vec2::new(nb.x, 2.0 * v[i].y - nb.y),
            };
            if i == 0 {
                (ghost, v[0], v[1])
            } else {
                (v[m - 2], v[m - 1], ghost)
            }
        };
        let normal = (c - a).perp().normalized();
        let kappa = menger_curvature(a, b, c);
        let coef = if state.is_pole(i) { state.n as f64 * kappa } else { kappa - nm1 * normal.x / b.x };
        out.push((normal, coef));
    }
    Ok(out)
}

/// Scalar mean curvature with respect to the inward normal.
pub fn mean_curvature(state: &AxisymState) -> Result<Vec<f64>> {
    let sign = enclosed_orientation(&state.profile);
    Ok(curvature_terms(state)?.into_iter().map(|(_, c)| sign * c).collect())
}

/// +1 when the left normal points into the region bounded by the profile
/// (closed through the axis for open profiles), -1 otherwise.
fn enclosed_orientation(profile: &Polyline) -> f64 {
    if profile.signed_area() >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// One explicit step of the profile flow.
pub fn step_axisym(state: &AxisymState, dt: f64) -> Result<AxisymState> {
    let limit = state.max_dt();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    let hv = mean_curvature_vectors(state)?;
    let m = state.profile.len();
    let closed = state.profile.is_closed();
    let mut pts: Vec<Vec2> = state.profile.vertices().iter().zip(&hv).map(|(&p, &v)| p + v * dt).collect();
    if !closed {
        for (k, idx) in [(0usize, 0usize), (1, m - 1)] {
            match state.ends[k] {
                End::Pole => pts[idx].x = 0.0,
                End::Free => pts[idx].y = state.profile.vertices()[idx].y,
            }
        }
    }
    let mut profile = Polyline::new(pts, closed)?;
    if profile.edge_ratio() > MAX_EDGE_RATIO || profile.min_edge() < 0.5 * state.h_target {
        profile = resample(&profile, state.h_target)?;
    }
    if state.reflection_symmetric {
        profile = symmetrize(&profile)?;
    }
    let next = AxisymState { profile, t: state.t + dt, ..state.clone() };
    next.check_axis()?;
    Ok(next)
}

/// Average each vertex with the mirror image (`z → -z`) of its partner.
/// Closed profiles pair `k` with `N - k`; open ones pair `k` with `N-1-k`.
pub fn symmetrize(profile: &Polyline) -> Result<Polyline> {
    let v = profile.vertices();
    let m = v.len();
    let partner = |k: usize| if profile.is_closed() { (m - k) % m } else { m - 1 - k };
    let pts = (0..m)
        .map(|k| {
            let q = v[partner(k)];
            (v[k] + Vec2::new(q.x, -q.y)) * 0.5
        })
        .collect();
    Polyline::new(pts, profile.is_closed())
}

/// Largest distance between a vertex and the mirror image of its partner.
pub fn symmetry_defect(profile: &Polyline) -> f64 {
    let v = profile.vertices();
    let m = v.len();
    let partner = |k: usize| if profile.is_closed() { (m - k) % m } else { m - 1 - k };
    (0..m)
        .map(|k| {
            let q = v[partner(k)];
            v[k].dist(Vec2::new(q.x, -q.y))
        })
        .fold(0.0, f64::max)
}

/// Advance to `t_end` with maximal stable steps.
pub fn evolve_until(mut state: AxisymState, t_end: f64) -> Result<AxisymState> {
    while state.t < t_end - 1e-15 {
        let dt = state.max_dt().min(t_end - state.t);
        let target = state.t + dt;
        state = step_axisym(&state, dt)?;
        if (target - t_end).abs() < 1e-15 {
            state.t = t_end;
        }
    }
    Ok(state)
}

/// Sphere of radius `r` centred on the axis at height `z0`: a semicircle
/// from the south pole to the north pole with `segments` edges.
pub fn sphere_profile(r: f64, z0: f64, n: usize, segments: usize) -> Result<AxisymState> {
    let pts = (0..=segments)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / segments as f64;
            let mut p = Vec2::new(r * th.sin(), z0 - r * th.cos());
            if k == 0 || k == segments {
                p.x = 0.0;
            }
            p
        })
        .collect();
    AxisymState::new(Polyline::open(pts)?, n, Axis::Y, [End::Pole, End::Pole], z0 == 0.0)
}

/// Straight cylinder profile of radius `r` over `z ∈ [-half, half]` with
/// mirror-symmetric ends.
pub fn cylinder_profile(r: f64, half: f64, n: usize, segments: usize) -> Result<AxisymState> {
    let pts = (0..=segments).map(|k| Vec2::new(r, -half + 2.0 * half * k as f64 / segments as f64)).collect();
    AxisymState::new(Polyline::open(pts)?, n, Axis::Y, [End::Free, End::Free], true)
}

/// Measure of the union of round `(n-1)`-spheres with the given radii.
pub fn spheres_measure(radii: &[f64], n: usize) -> f64 {
    let c = unit_sphere_area(n - 1);
    radii.iter().map(|r| c * r.powi(n as i32 - 1)).sum()
}
