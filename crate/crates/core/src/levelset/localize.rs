//! Whether a level set flow splits into the flows of its pieces on either
//! side of a cut.

use serde::{Deserialize, Serialize};

use super::{densify, evolve_until, LevelSetState};
use crate::error::{Error, Result};
use crate::geometry::{hausdorff_distance, set_distance, Vec2};
use crate::verdict::Verdict;

/// The cutting set `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Region {
    Disk {
        centre: [f64; 2],
        radius: f64,
    },
    /// Points on the side of the line through `point` opposite to `normal`.
    HalfPlane {
        point: [f64; 2],
        normal: [f64; 2],
    },
}

impl Region {
    /// Signed distance, negative inside.
    pub fn distance(&self, p: Vec2) -> f64 {
        match *self {
            Region::Disk { centre, radius } => p.dist(Vec2::new(centre[0], centre[1])) - radius,
            Region::HalfPlane { point, normal } => {
                let n = Vec2::new(normal[0], normal[1]).normalized();
                (p - Vec2::new(point[0], point[1])).dot(n)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizeSample {
    pub t: f64,
    /// Hausdorff distance between the whole zero set and the union of the
    /// pieces' zero sets.
    pub union_distance: f64,
    /// Distance between the two pieces' zero sets.
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizabilityReport {
    pub passes: bool,
    /// Points where the zero set crosses the boundary of `K` at the start.
    pub crossings: Vec<Vec2>,
    pub samples: Vec<LocalizeSample>,
    pub verdict: Verdict,
}

impl LocalizabilityReport {
    pub const CSV_HEADER: &'static str = "t,union_distance,separation";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.samples {
            s.push_str(&format!("{},{},{}\n", r.t, r.union_distance, r.separation));
        }
        s
    }
}

fn boundary_crossings(state: &LevelSetState, region: &Region) -> Vec<Vec2> {
    let mut out = Vec::new();
    for c in state.zero_set() {
        let m = c.points.len();
        let segs = if c.closed { m } else { m.saturating_sub(1) };
        for k in 0..segs {
            let (a, b) = (c.points[k], c.points[(k + 1) % m]);
            let (da, db) = (region.distance(a), region.distance(b));
            if da == 0.0 {
                out.push(a);
            } else if (da < 0.0) != (db < 0.0) && db != 0.0 {
                out.push(a.lerp(b, da / (da - db)));
            }
        }
    }
    out
}

/// Zero-set point clouds of `state` at `t0 + k sample_dt`, `k = 0..=count`.
fn zero_set_history(mut state: LevelSetState, count: usize, sample_dt: f64) -> Result<Vec<Vec<Vec2>>> {
    let t0 = state.t;
    let h = state.h();
    let mut out = Vec::with_capacity(count + 1);
    for k in 0..=count {
        state = evolve_until(state, t0 + k as f64 * sample_dt)?;
        out.push(densify(&state.zero_set(), h / 4.0));
    }
    Ok(out)
}

/// Evolve the whole level set and its two pieces `{phi <= 0} ∩ K` and
/// `{phi <= 0} \ K` for `duration`, and check that the pieces' zero sets
/// stay more than `2h` apart and together match the whole within `2h`.
pub fn localizability_check(
    state: &LevelSetState,
    region: &Region,
    duration: f64,
    sample_dt: f64,
) -> Result<LocalizabilityReport> {
    let h = state.h();
    let crossings = boundary_crossings(state, region);
    for (i, a) in crossings.iter().enumerate() {
        if crossings[i + 1..].iter().any(|b| a.dist(*b) <= 2.0 * h) {
            return Err(Error::IntersectionTooLarge);
        }
    }
    let f = &state.phi;
    let cut: Vec<f64> = (0..f.values().len()).map(|k| region.distance(f.pos(k % f.nx(), k / f.nx()))).collect();
    let inside: Vec<f64> = f.values().iter().zip(&cut).map(|(&p, &d)| p.max(d)).collect();
    let outside: Vec<f64> = f.values().iter().zip(&cut).map(|(&p, &d)| p.max(-d)).collect();
    let piece_in = LevelSetState { phi: f.with_values(inside)?, ..state.clone() };
    let piece_out = LevelSetState { phi: f.with_values(outside)?, ..state.clone() };
    let count = (duration / sample_dt + 1e-9).floor() as usize;
    let (whole, (a, b)) = rayon::join(
        || zero_set_history(state.clone(), count, sample_dt),
        || {
            rayon::join(
                || zero_set_history(piece_in, count, sample_dt),
                || zero_set_history(piece_out, count, sample_dt),
            )
        },
    );
    let (whole, a, b) = (whole?, a?, b?);
    let mut samples = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let union: Vec<Vec2> = a[k].iter().chain(&b[k]).copied().collect();
        samples.push(LocalizeSample {
            t: state.t + k as f64 * sample_dt,
            union_distance: hausdorff_distance(&whole[k], &union),
            separation: set_distance(&a[k], &b[k]),
        });
    }
    let tol = 2.0 * h;
    let bad_union = samples.iter().position(|s| s.union_distance > tol);
    let bad_sep = samples.iter().skip(1).position(|s| s.separation <= tol).map(|k| k + 1);
    let passes = bad_union.is_none() && bad_sep.is_none();

    let mut verdict = Verdict::new("localizability");
    verdict.localizable = Some(passes);
    if let Some(k) = bad_union {
        verdict.note(Some(k), Some(samples[k].t), "pieces do not reproduce the whole flow");
    }
    if let Some(k) = bad_sep {
        verdict.note(Some(k), Some(samples[k].t), "pieces rejoin");
    }
    verdict.tolerance("h", h);
    verdict.tolerance("union_tol", tol);
    verdict.tolerance("separation_tol", tol);
    verdict.tolerance("crossing_spacing", tol);
    Ok(LocalizabilityReport { passes, crossings, samples, verdict })
}

#[cfg(test)]
mod tests {
    use super::super::LsMode;
    use super::*;
    use crate::geometry::ScalarField2D;

    fn two_circles(h: f64) -> LevelSetState {
        let phi =
            ScalarField2D::from_fn((3.0 / h) as usize + 1, (2.0 / h) as usize + 1, h, Vec2::new(-1.5, -1.0), |p| {
                (p.dist(Vec2::new(-0.7, 0.0)) - 0.5).min(p.dist(Vec2::new(0.7, 0.0)) - 0.5)
            })
            .unwrap();
        LevelSetState::new(phi, LsMode::Planar).unwrap()
    }

    #[test]
    fn disjoint_circles_are_localizable() {
        let s = two_circles(1.0 / 32.0);
        let cut = Region::HalfPlane { point: [0.0, 0.0], normal: [1.0, 0.0] };
        let r = localizability_check(&s, &cut, 0.08, 0.02).unwrap();
        assert!(r.passes, "{:?}", r.samples);
        assert_eq!(r.verdict.localizable, Some(true));
        assert!(r.crossings.is_empty());
    }

    #[test]
    fn grazing_cut_is_rejected() {
        let s = two_circles(1.0 / 32.0);
        // barely overlaps the right circle: two crossings less than 2h apart
        let cut = Region::Disk { centre: [1.4993, 0.0], radius: 0.3 };
        let c = boundary_crossings(&s, &cut);
        assert_eq!(c.len(), 2, "{c:?}");
        assert_eq!(localizability_check(&s, &cut, 0.02, 0.01).unwrap_err(), Error::IntersectionTooLarge);
    }
}
