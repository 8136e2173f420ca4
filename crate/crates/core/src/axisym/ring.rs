//! The marriage-ring profile: a convex, mirror-symmetric closed curve far
//! from the axis whose inner point is much more curved than its outer one.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;

use super::{evolve_until, mean_curvature, spheres_measure, Axis, AxisymState, End};
use crate::error::{Error, Result};
use crate::geometry::{IntersectionSample, PointCloud, Polyline, SampleScales, ScalarField2D, Vec2};
use crate::graphical::GraphPair;
use crate::verdict::{scan_nonincreasing, Verdict};

const RHO_MIN: f64 = 0.1;
const RHO_MAX: f64 = 10.0;
const PEAK_POWER: i32 = 1000;
const OUTER_BUMP: (f64, f64) = (0.8, 1.57);
const INNER_BUMP_HALF_WIDTH: f64 = 1.0;
const TABLE_INTERVALS: usize = 1 << 16;
const CLOSURE_TOL: f64 = 1e-8;
/// Largest time used for the smooth horizon.
pub const DELTA_CAP: f64 = 0.02;
/// Time step of the forward difference giving the initial measure rate.
/// The inner curvature peak relaxes on a scale of about 1e-4, so the rate
/// over a full sample interval badly underestimates the value at `t = 0`.
pub const RATE_PROBE_DT: f64 = 1e-5;

fn bump(x: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo || x >= hi {
        0.0
    } else {
        (PI * (x - lo) / (hi - lo)).sin().powi(4)
    }
}

/// Radius of curvature of the ring as a function of the normal angle `φ`
/// (`φ = 0` at the outermost point, `φ = π` at the innermost), built from a
/// sharp peak of height 10 at `φ = 0`, a floor of 0.1, and two bumps whose
/// amplitudes close the curve.
#[derive(Debug, Clone)]
pub struct MarriageRing {
    pub n: usize,
    pub outer_amp: f64,
    pub inner_amp: f64,
    /// `(φ, γ(φ))` for `φ ∈ [0, π]` on a uniform grid.
    table: Vec<(f64, Vec2)>,
    /// Arclength from `φ = 0`, on the same grid.
    arclength: Vec<f64>,
}

fn base_rho(phi: f64) -> f64 {
    let c = 0.5 * (1.0 + phi.cos());
    RHO_MIN + (RHO_MAX - RHO_MIN) * c.powi(PEAK_POWER)
}

fn outer_part(phi: f64) -> f64 {
    bump(phi.abs(), OUTER_BUMP.0, OUTER_BUMP.1)
}

fn inner_part(phi: f64) -> f64 {
    bump(PI - phi.abs(), 0.0, INNER_BUMP_HALF_WIDTH)
}

/// Composite Simpson on `[0, π]` with `TABLE_INTERVALS` panels.
fn simpson(f: impl Fn(f64) -> f64) -> f64 {
    let m = TABLE_INTERVALS;
    let d = PI / m as f64;
    let mut s = f(0.0) + f(PI);
    for k in 1..m {
        s += f(k as f64 * d) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * d / 3.0
}

impl MarriageRing {
    /// Solve for the bump amplitudes so that the curve closes with
    /// `r_max - r_min = 1`, and tabulate it with `r_min = 10 n`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InfeasibleProfile(format!("n = {n} < 2")));
        }
        // closure: ∫_0^π ρ cos φ dφ = 0 (back on the mirror line) and
        // ∫_0^π ρ sin φ dφ = 1 (unit width); both are affine in the
        // amplitudes, so Newton converges in one step, but we iterate to the
        // tolerance regardless
        let jac = [
            [simpson(|p| outer_part(p) * p.cos()), simpson(|p| inner_part(p) * p.cos())],
            [simpson(|p| outer_part(p) * p.sin()), simpson(|p| inner_part(p) * p.sin())],
        ];
        let base = [simpson(|p| base_rho(p) * p.cos()), simpson(|p| base_rho(p) * p.sin())];
        let residual =
            |a: f64, b: f64| [base[0] + a * jac[0][0] + b * jac[0][1], base[1] + a * jac[1][0] + b * jac[1][1] - 1.0];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let (mut a, mut b) = (0.0, 0.0);
        for _ in 0..20 {
            let r = residual(a, b);
            if r[0].abs().max(r[1].abs()) < 1e-13 {
                break;
            }
            a -= (jac[1][1] * r[0] - jac[0][1] * r[1]) / det;
            b -= (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det;
        }
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::InfeasibleProfile(format!("bump amplitudes {a}, {b}")));
        }
        let mut ring = MarriageRing { n, outer_amp: a, inner_amp: b, table: Vec::new(), arclength: Vec::new() };
        ring.tabulate();
        let end = ring.table.last().unwrap().1;
        let r_min = 10.0 * n as f64;
        let err = end.y.abs().max((end.x - r_min).abs());
        if err > CLOSURE_TOL {
            return Err(Error::ProfileClosureFailed(err));
        }
        ring.check_curvature()?;
        Ok(ring)
    }

    pub fn rho(&self, phi: f64) -> f64 {
        let p = phi.sin().atan2(phi.cos());
        base_rho(p) + self.outer_amp * outer_part(p) + self.inner_amp * inner_part(p)
    }

    pub fn r_max(&self) -> f64 {
        10.0 * self.n as f64 + 1.0
    }

    pub fn r_min(&self) -> f64 {
        10.0 * self.n as f64
    }

    fn tangent(&self, phi: f64) -> Vec2 {
        Vec2::new(-phi.sin(), phi.cos()) * self.rho(phi)
    }

    /// Cumulative Simpson over pairs of panels gives γ and arclength at every
    /// other grid node.
    fn tabulate(&mut self) {
        let m = TABLE_INTERVALS;
        let d = PI / m as f64;
        let mut g = Vec2::new(self.r_max(), 0.0);
        let mut s = 0.0;
        self.table = vec![(0.0, g)];
        self.arclength = vec![0.0];
        for k in (0..m).step_by(2) {
            let (p0, p1, p2) = (k as f64 * d, (k + 1) as f64 * d, (k + 2) as f64 * d);
            g += (self.tangent(p0) + self.tangent(p1) * 4.0 + self.tangent(p2)) * (d / 3.0);
            s += (self.rho(p0) + 4.0 * self.rho(p1) + self.rho(p2)) * d / 3.0;
            self.table.push((p2, g));
            self.arclength.push(s);
        }
    }

    fn check_curvature(&self) -> Result<()> {
        // inner half: κ ≥ 1/5; everywhere κ in [1/10, 10]
        for k in 0..=4000 {
            let phi = PI * k as f64 / 4000.0;
            let kappa = 1.0 / self.rho(phi);
            if !(0.1 - 1e-12..=10.0 + 1e-12).contains(&kappa) || (phi >= PI / 2.0 && kappa < 0.2) {
                return Err(Error::InfeasibleProfile(format!("curvature {kappa} at φ = {phi}")));
            }
        }
        Ok(())
    }

    /// Point at normal angle `φ`, by Hermite interpolation of the table;
    /// angles in `(-π, 0)` are mirror images.
    pub fn point(&self, phi: f64) -> Vec2 {
        let phi = phi.sin().atan2(phi.cos());
        let a = phi.abs().min(PI);
        let step = self.table[1].0;
        let k = ((a / step).floor() as usize).min(self.table.len() - 2);
        let (p0, g0) = self.table[k];
        let (p1, g1) = self.table[k + 1];
        let u = (a - p0) / step;
        let (t0, t1) = (self.tangent(p0) * step, self.tangent(p1) * step);
        let h00 = 2.0 * u * u * u - 3.0 * u * u + 1.0;
        let h10 = u * u * u - 2.0 * u * u + u;
        let h01 = -2.0 * u * u * u + 3.0 * u * u;
        let h11 = u * u * u - u * u;
        let p = g0 * h00 + t0 * h10 + g1 * h01 + t1 * h11;
        if phi < 0.0 {
            Vec2::new(p.x, -p.y)
        } else {
            p
        }
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * self.arclength.last().unwrap()
    }

    /// Normal angle at arclength `s ∈ [0, P/2]` from the outer point.
    fn angle_at(&self, s: f64) -> f64 {
        let k = self.arclength.partition_point(|&x| x < s).clamp(1, self.arclength.len() - 1);
        let (s0, s1) = (self.arclength[k - 1], self.arclength[k]);
        let (p0, p1) = (self.table[k - 1].0, self.table[k].0);
        let mut phi = p0 + (p1 - p0) * (s - s0) / (s1 - s0).max(1e-300);
        // Newton on s(φ) = s, with s' = ρ and s(p0) known
        for _ in 0..4 {
            let sp = s0 + integrate_rho(self, p0, phi);
            phi -= (sp - s) / self.rho(phi);
        }
        phi.clamp(0.0, PI)
    }

    /// Closed polyline with `vertices` points equally spaced in arclength,
    /// counterclockwise, vertex 0 at the outer point and vertex `N/2` at the
    /// inner point when `N` is even.
    pub fn polyline(&self, vertices: usize) -> Result<Polyline> {
        let p = self.perimeter();
        let pts = (0..vertices)
            .map(|k| {
                let s = p * k as f64 / vertices as f64;
                if s <= 0.5 * p {
                    self.point(self.angle_at(s))
                } else {
                    self.point(-self.angle_at(p - s))
                }
            })
            .collect();
        Polyline::closed(pts)
    }

    /// Local description `r = g(z)` near the crossing at `phi0` (0 or π),
    /// with `g'(z)`.
    fn local_graph(&self, phi0: f64, z: f64) -> (f64, f64) {
        let mut phi = phi0;
        for _ in 0..50 {
            let p = self.point(phi);
            let dy = self.rho(phi) * phi.cos();
            let step = (p.y - z) / dy;
            phi -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        (self.point(phi).x, -phi.tan())
    }
}

fn integrate_rho(ring: &MarriageRing, a: f64, b: f64) -> f64 {
    // 8-panel Simpson is ample on one table cell
    let m = 8;
    let d = (b - a) / m as f64;
    let mut s = ring.rho(a) + ring.rho(b);
    for k in 1..m {
        s += ring.rho(a + k as f64 * d) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * d / 3.0
}

/// The marriage-ring profile for dimension `n`, rotating about the y-axis,
/// with 2048 vertices.
pub fn marriage_ring_profile(n: usize) -> Result<AxisymState> {
    marriage_ring_profile_with(n, 2048)
}

pub fn marriage_ring_profile_with(n: usize, vertices: usize) -> Result<AxisymState> {
    let ring = MarriageRing::new(n)?;
    AxisymState::new(ring.polyline(vertices)?, n, Axis::Y, [End::Free, End::Free], true)
}

/// Radii where the profile crosses the mirror line `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingRadii {
    pub r_min: f64,
    pub r_max: f64,
    pub t: f64,
}

/// All crossings of a closed profile with `z = 0`, by linear interpolation
/// along edges, sorted.
pub fn mirror_crossings(profile: &Polyline) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..profile.edge_count() {
        let (a, b) = profile.edge(i);
        let (za, zb) = (if a.y == 0.0 { 1e-300 } else { a.y }, if b.y == 0.0 { 1e-300 } else { b.y });
        if (za < 0.0) != (zb < 0.0) {
            let s = za / (za - zb);
            out.push(a.x + (b.x - a.x) * s);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// `r_min`, `r_max` when the profile crosses `z = 0` exactly twice.
pub fn ring_radii(state: &AxisymState) -> Option<RingRadii> {
    let xs = mirror_crossings(&state.profile);
    (xs.len() == 2).then(|| RingRadii { r_min: xs[0], r_max: xs[1], t: state.t })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingSample {
    pub t: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub measure: f64,
    pub max_h: f64,
}

/// Evolution of the ring's intersection with the mirror hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSeries {
    pub samples: Vec<RingSample>,
    /// Smooth horizon: first sample time at which `max |H|` has doubled,
    /// capped at [`DELTA_CAP`] and the run length.
    pub delta: f64,
    /// Set when the crossing count left 2 and the series ended.
    pub topology_change: Option<f64>,
    /// Forward difference of the measure over `[0, RATE_PROBE_DT]`.
    pub initial_rate: f64,
    pub verdict: Verdict,
    /// Profiles at each sample, kept only when frames were requested.
    pub frames: Vec<String>,
}

impl RingSeries {
    pub const CSV_HEADER: &'static str = "t,r_min,r_max,measure,components";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.samples {
            s.push_str(&format!("{},{},{},{},2\n", r.t, r.r_min, r.r_max, r.measure));
        }
        s
    }

    /// Samples as intersection snapshots (two spheres each).
    pub fn intersection_samples(&self, n: usize, h: f64) -> Result<Vec<IntersectionSample>> {
        self.samples
            .iter()
            .map(|r| {
                let cloud = PointCloud::axisymmetric(vec![Vec2::new(r.r_min, 0.0), Vec2::new(r.r_max, 0.0)], n);
                IntersectionSample::from_cloud(r.t, cloud, &SampleScales::for_resolution(h))
            })
            .collect()
    }

    /// Forward difference of the measure over the first sample interval.
    pub fn first_interval_rate(&self) -> Option<f64> {
        let (a, b) = (self.samples.first()?, self.samples.get(1)?);
        Some((b.measure - a.measure) / (b.t - a.t))
    }

    /// Whether the measure strictly increases over all samples in `[0, δ]`.
    pub fn increasing_until_delta(&self) -> bool {
        let upto: Vec<&RingSample> = self.samples.iter().filter(|s| s.t <= self.delta + 1e-12).collect();
        upto.len() >= 2 && upto.windows(2).all(|w| w[1].measure > w[0].measure)
    }
}

/// Evolve a mirror-symmetric ring and record its two crossing radii and the
/// measure `C_{n-1} (r_min^{n-1} + r_max^{n-1})` every `sample_dt`.
pub fn ring_intersection_series(state0: &AxisymState, t_end: f64, sample_dt: f64, frames: bool) -> Result<RingSeries> {
    if !state0.reflection_symmetric {
        return Err(Error::InvalidPolyline("ring series needs a mirror-symmetric profile".into()));
    }
    if ring_radii(state0).is_none() {
        return Err(Error::InvalidPolyline("profile must cross the mirror line twice".into()));
    }
    let n = state0.n;
    let count = (t_end / sample_dt + 1e-9).floor() as usize;
    let probe = evolve_until(state0.clone(), RATE_PROBE_DT.min(sample_dt))?;
    let initial_rate = match (ring_radii(state0), ring_radii(&probe)) {
        (Some(a), Some(b)) => {
            (spheres_measure(&[b.r_min, b.r_max], n) - spheres_measure(&[a.r_min, a.r_max], n)) / (probe.t - state0.t)
        }
        _ => f64::NAN,
    };
    let mut state = state0.clone();
    let mut samples = Vec::new();
    let mut pictures = Vec::new();
    let mut topology_change = None;
    let mut h0 = None;
    let mut doubled_at = None;
    for k in 0..=count {
        let ts = k as f64 * sample_dt;
        state = evolve_until(state, ts)?;
        let Some(radii) = ring_radii(&state) else {
            topology_change = Some(ts);
            break;
        };
        let max_h = mean_curvature(&state)?.iter().fold(0.0f64, |m, h| m.max(h.abs()));
        let base = *h0.get_or_insert(max_h);
        if doubled_at.is_none() && max_h >= 2.0 * base {
            doubled_at = Some(ts);
        }
        samples.push(RingSample {
            t: ts,
            r_min: radii.r_min,
            r_max: radii.r_max,
            measure: spheres_measure(&[radii.r_min, radii.r_max], n),
            max_h,
        });
        if frames {
            pictures.push(state.svg(&[Vec2::new(radii.r_min, 0.0), Vec2::new(radii.r_max, 0.0)]));
        }
    }
    let last_t = samples.last().map_or(0.0, |s| s.t);
    let delta = doubled_at.unwrap_or(f64::INFINITY).min(DELTA_CAP).min(last_t);

    let mut verdict = Verdict::new("marriage_ring");
    let measures: Vec<Option<f64>> = samples.iter().map(|s| Some(s.measure)).collect();
    let scan = scan_nonincreasing(&measures, 0.0);
    verdict.monotone_measure = Some(scan.monotone);
    verdict.monotone_count = Some(true);
    let mut series = RingSeries {
        samples,
        delta,
        topology_change,
        initial_rate,
        verdict: Verdict::new("marriage_ring"),
        frames: pictures,
    };
    if series.increasing_until_delta() {
        let last = series.samples.iter().rposition(|s| s.t <= delta + 1e-12).unwrap_or(0);
        verdict.note(Some(last), Some(delta), "measure increased on [0,δ]");
    }
    if let Some(k) = scan.violation {
        verdict.note(Some(k), Some(series.samples[k].t), "intersection measure increased");
    }
    if let Some(t) = topology_change {
        verdict.note(None, Some(t), "topology-change: crossing count left 2; series ends");
    }
    verdict.tolerance("delta", delta);
    verdict.tolerance("delta_cap", DELTA_CAP);
    verdict.tolerance("h", state0.h_target);
    verdict.tolerance("cfl", super::CFL);
    series.verdict = verdict;
    Ok(series)
}

/// Local patches of the ring surface (`n = 2`) and the mirror plane near the
/// inner and outer crossing circles, written as graphs over a common plane
/// tilted by 45° in the meridian. Each grid has `nodes²` nodes spanning
/// `[-half_width, half_width]²`.
pub fn ring_graph_patches(ring: &MarriageRing, nodes: usize, half_width: f64) -> Result<Vec<GraphPair>> {
    let h = 2.0 * half_width / (nodes - 1) as f64;
    let origin = Vec2::new(-half_width, -half_width);
    let (sa, ca) = FRAC_PI_4.sin_cos();
    let mut out = Vec::new();
    for (phi0, r0) in [(PI, ring.r_min()), (0.0, ring.r_max())] {
        let plane = ScalarField2D::from_fn(nodes, nodes, h, origin, |p| -p.x * sa / ca)?;
        let surface = ScalarField2D::from_fn(nodes, nodes, h, origin, |p| {
            // solve |(r0 + x1 cα - u sα, x2)| = g(x1 sα + u cα) for u
            let mut u = 0.0;
            for _ in 0..60 {
                let x = r0 + p.x * ca - u * sa;
                let r = x.hypot(p.y);
                let (g, dg) = ring.local_graph(phi0, p.x * sa + u * ca);
                let f = r - g;
                let df = -sa * x / r - dg * ca;
                let step = f / df;
                u -= step;
                if step.abs() < 1e-14 {
                    break;
                }
            }
            u
        })?;
        out.push(GraphPair::new(plane, surface)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_meets_its_pinned_values() {
        let ring = MarriageRing::new(2).unwrap();
        assert!((ring.rho(0.0) - 10.0).abs() < 1e-12);
        assert!((ring.rho(PI) - 0.1).abs() < 1e-12);
        let s = marriage_ring_profile(2).unwrap();
        let r = ring_radii(&s).unwrap();
        assert!((r.r_min - 20.0).abs() < 0.2 && (r.r_max - 21.0).abs() < 0.2);
        assert!(super::super::symmetry_defect(&s.profile) < s.h_target);
        assert!(s.profile.edge_ratio() < 1.01);
    }

    #[test]
    fn ring_is_closed_and_convex() {
        let ring = MarriageRing::new(3).unwrap();
        let end = ring.point(PI);
        assert!((end.x - 30.0).abs() < 1e-8 && end.y.abs() < 1e-8);
        let c = ring.polyline(1024).unwrap();
        assert!(crate::geometry::curvature(&c).iter().all(|&k| k > 0.0));
    }
}
