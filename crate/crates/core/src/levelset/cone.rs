//! Double cone through the origin, rotating about the y-axis, cut by the
//! horizontal plane `{y = plane_offset}`.

use serde::{Deserialize, Serialize};

use super::track::{FatteningReport, FatteningVerdict, InnerOuter, TrackMode};
use super::{meridian_grid, LevelSetState, LsMode};
use crate::axisym::Axis;
use crate::error::{Error, Result};
use crate::geometry::{Contour, IntersectionSample, PointCloud, SampleScales, ScalarField2D, Vec2};
use crate::verdict::{scan_nonincreasing, Verdict};

/// Tolerance of the dimension monotonicity scan.
pub const DIM_TOL: f64 = 0.2;

/// Geometry and resolution of the cone scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConeSetup {
    /// Full opening angle of each nappe, in degrees.
    pub aperture_deg: f64,
    pub plane_offset: f64,
    pub h: f64,
    /// Half-size of the meridian window.
    pub extent: f64,
    pub track_mode: TrackMode,
    pub reinit_every: usize,
}

impl Default for ConeSetup {
    fn default() -> Self {
        ConeSetup {
            aperture_deg: 140.0,
            plane_offset: 0.0,
            h: 1.0 / 128.0,
            extent: 1.0,
            track_mode: TrackMode::TwoRun,
            reinit_every: super::REINIT_EVERY,
        }
    }
}

/// Signed distance to the solid double cone of half-angle `alpha` about
/// the y-axis (negative inside), in meridian coordinates `(r, y)`.
fn cone_distance(p: Vec2, alpha: f64) -> f64 {
    let q = Vec2::new(p.x, p.y.abs());
    let g = Vec2::new(alpha.sin(), alpha.cos());
    let d = if q.dot(g) >= 0.0 { (q.x * g.y - q.y * g.x).abs() } else { q.norm() };
    if q.x * alpha.cos() < q.y * alpha.sin() {
        -d
    } else {
        d
    }
}

/// The solid double cone as a meridian level set (`n = 2`).
pub fn double_cone_state(setup: &ConeSetup) -> Result<LevelSetState> {
    if !(setup.aperture_deg > 0.0 && setup.aperture_deg < 180.0) {
        return Err(Error::Config(format!("aperture {} must lie in (0, 180) degrees", setup.aperture_deg)));
    }
    let alpha = 0.5 * setup.aperture_deg.to_radians();
    let (nx, ny, origin) = meridian_grid(Axis::Y, (-setup.extent, setup.extent), setup.extent, setup.h);
    let phi = ScalarField2D::from_fn(nx, ny, setup.h, origin, |p| cone_distance(p, alpha))?;
    let mut state = LevelSetState::new(phi, LsMode::Axisym { n: 2, axis: Axis::Y })?;
    state.reinit_every = setup.reinit_every;
    Ok(state)
}

/// Radii at which contours cross the line `y = c`.
pub fn crossings_with_line(cs: &[Contour], c: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in cs {
        let m = k.points.len();
        let segs = if k.closed { m } else { m.saturating_sub(1) };
        for s in 0..segs {
            let (a, b) = (k.points[s], k.points[(s + 1) % m]);
            if (a.y < c) != (b.y < c) {
                out.push(a.x + (b.x - a.x) * (c - a.y) / (b.y - a.y));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSeries {
    pub samples: Vec<IntersectionSample>,
    /// Largest crossing radius with the plane, per sample.
    pub radii: Vec<Option<f64>>,
    pub reports: Vec<FatteningReport>,
    pub verdict: Verdict,
    pub final_state: InnerOuter,
}

impl ConeSeries {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", IntersectionSample::CSV_HEADER);
        for x in &self.samples {
            s.push_str(&x.csv_row());
            s.push('\n');
        }
        s
    }

    pub fn fattening_csv(&self) -> String {
        let mut s = String::from("t,fat_volume,discrepancy,verdict\n");
        for r in &self.reports {
            s.push_str(&format!("{},{},{},{}\n", r.t, r.fat_volume, r.discrepancy, r.verdict.as_str()));
        }
        s
    }

    /// `r(t) / sqrt(t)` for the samples with `t > 0` and a crossing.
    pub fn scaling_ratios(&self) -> Vec<f64> {
        self.samples
            .iter()
            .zip(&self.radii)
            .filter_map(|(s, r)| r.filter(|_| s.t > 0.0).map(|r| r / s.t.sqrt()))
            .collect()
    }

    /// `max/min - 1` of [`Self::scaling_ratios`].
    pub fn scaling_spread(&self) -> Option<f64> {
        let r = self.scaling_ratios();
        if r.is_empty() {
            return None;
        }
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = r.iter().cloned().fold(0.0, f64::max);
        Some(hi / lo - 1.0)
    }

    pub fn fattening(&self) -> bool {
        self.reports.last().is_some_and(|r| r.verdict == FatteningVerdict::Fattening)
    }
}

/// Evolve the double cone (by default with two runs for the outer and inner
/// flows) and record the intersection of the outer flow with the plane. At `t = 0` the
/// intersection is that of the initial cone itself.
pub fn cone_intersection_scenario(setup: &ConeSetup, t_end: f64, sample_dt: f64) -> Result<ConeSeries> {
    let state = double_cone_state(setup)?;
    let h = setup.h;
    let alpha = 0.5 * setup.aperture_deg.to_radians();
    let scales = SampleScales::for_resolution(h);
    let c = setup.plane_offset;
    let count = (t_end / sample_dt + 1e-9).floor() as usize;
    let mut run = InnerOuter::new(state, setup.track_mode)?;
    let mut samples = Vec::new();
    let mut radii = Vec::new();
    let mut reports: Vec<FatteningReport> = Vec::new();
    for k in 0..=count {
        let t = k as f64 * sample_dt;
        run = run.evolve_until(t)?;
        reports.push(run.report(reports.last()));
        let rs = if k == 0 {
            // the cone meets the plane on the vertex or one circle
            vec![if c == 0.0 { 0.0 } else { c.abs() * alpha.tan() }]
        } else {
            crossings_with_line(&run.primary().zero_set(), c)
        };
        radii.push(rs.last().copied());
        let cloud = PointCloud::axisymmetric(rs.iter().map(|&r| Vec2::new(r, c)).collect(), 2);
        samples.push(IntersectionSample::from_cloud(t, cloud, &scales)?);
    }

    let mut verdict = Verdict::new("cone_fattening");
    let dims: Vec<Option<f64>> = samples.iter().map(|s| s.dim_est).collect();
    let scan = scan_nonincreasing(&dims, DIM_TOL);
    verdict.monotone_dim = Some(scan.monotone);
    if let Some(k) = scan.violation {
        verdict.note(Some(k), Some(samples[k].t), "intersection dimension increased");
    }
    let counts: Vec<Option<f64>> = samples.iter().map(|s| Some(s.components as f64)).collect();
    let cscan = scan_nonincreasing(&counts, 0.0);
    verdict.monotone_count = Some(cscan.monotone);
    if let Some(k) = cscan.violation {
        verdict.note(Some(k), Some(samples[k].t), "intersection component count increased");
    }
    let fat = reports.last().is_some_and(|r| r.verdict == FatteningVerdict::Fattening);
    verdict.fattening = Some(fat);
    if let Some(k) = reports.iter().position(|r| r.verdict == FatteningVerdict::Fattening) {
        verdict.note(Some(k), Some(reports[k].t), "fattening: fat_volume above threshold on consecutive samples");
    }
    verdict.tolerance("h", h);
    verdict.tolerance("dim_tol", DIM_TOL);
    verdict.tolerance("link_r", scales.link_r);
    verdict.tolerance("axis_r", scales.axis_r);
    verdict.tolerance("fat_threshold", super::track::FAT_FACTOR * h * h);
    verdict.tolerance("thin_tol", super::track::THIN_TOL_FACTOR * h);
    verdict.tolerance("cfl", super::CFL);
    verdict.tolerance("reinit_every", setup.reinit_every as f64);
    Ok(ConeSeries { samples, radii, reports, verdict, final_state: run })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_distance_signs() {
        let a = 60f64.to_radians();
        assert!(cone_distance(Vec2::new(0.0, 1.0), a) < 0.0);
        assert!(cone_distance(Vec2::new(0.0, -1.0), a) < 0.0);
        assert!(cone_distance(Vec2::new(1.0, 0.0), a) > 0.0);
        // on a generator
        assert!(cone_distance(Vec2::new(a.sin(), a.cos()), a).abs() < 1e-12);
        assert!((cone_distance(Vec2::new(1.0, 0.0), a) - a.cos()).abs() < 1e-12);
    }

    #[test]
    fn initial_sample_is_the_vertex() {
        let setup = ConeSetup { h: 1.0 / 32.0, ..ConeSetup::default() };
        let s = cone_intersection_scenario(&setup, 0.0, 0.001).unwrap();
        let first = &s.samples[0];
        assert_eq!(first.components, 1);
        assert_eq!(first.measure_est, 0.0);
        assert_eq!(first.dim_est, Some(0.0));
    }

    #[test]
    fn bad_aperture_rejected() {
        let setup = ConeSetup { aperture_deg: 190.0, ..ConeSetup::default() };
        assert!(double_cone_state(&setup).is_err());
    }
}
