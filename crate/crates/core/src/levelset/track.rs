//! Inner and outer flows and the fattening diagnostic.

use serde::{Serialize, Serializer};

use super::{area_below, densify, evolve_until, reinitialize, LevelSetState};
use crate::error::Result;
use crate::geometry::{contours, hausdorff_distance, Contour, ScalarField2D, Vec2};
use crate::verdict::Verdict;

/// Band half-width `thin_tol = THIN_TOL_FACTOR * h`.
pub const THIN_TOL_FACTOR: f64 = 3.0;
/// `fat_threshold = FAT_FACTOR * h^2` (grid area in the computational plane).
pub const FAT_FACTOR: f64 = 10.0;

/// How the inner and outer flows are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackMode {
    /// Level sets `±thin_tol/2` of a single evolution.
    Offset,
    /// Two evolutions started from `phi0 ∓ h/2`.
    TwoRun,
}

/// Zero sets bounding the evolved region and its complement.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerOuterTrack {
    pub t: f64,
    /// Boundary of the flow of `{phi <= 0}`.
    pub outer: Vec<Contour>,
    /// Boundary of the flow of `{phi >= 0}`.
    pub inner: Vec<Contour>,
}

impl InnerOuterTrack {
    /// Hausdorff distance between the tracks (both empty gives 0; one
    /// empty gives the diameter of the other).
    pub fn hausdorff(&self, h: f64) -> f64 {
        let a = densify(&self.outer, h / 4.0);
        let b = densify(&self.inner, h / 4.0);
        let d = hausdorff_distance(&a, &b);
        if d.is_finite() {
            return d;
        }
        let pts = if a.is_empty() { &b } else { &a };
        let (lo, hi) = crate::geometry::polyline::bounds_of(pts);
        lo.dist(hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FatteningVerdict {
    Fattening,
    NonFatteningSoFar,
}

impl FatteningVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            FatteningVerdict::Fattening => "fattening",
            FatteningVerdict::NonFatteningSoFar => "non-fattening-so-far",
        }
    }
}

impl Serialize for FatteningVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FatteningReport {
    pub t: f64,
    /// Band area beyond what a sharp interface would occupy, clamped at 0.
    pub fat_volume: f64,
    /// Inner/outer Hausdorff distance beyond their nominal separation.
    pub discrepancy: f64,
    pub verdict: FatteningVerdict,
    pub band_volume: f64,
    pub expected_volume: f64,
    pub threshold: f64,
}

/// `∫ w / |∇phi| ds` over the contours, with the gradient sampled at
/// segment midpoints.
fn weighted_length(f: &ScalarField2D, cs: &[Contour], w: f64) -> f64 {
    let h = f.h();
    let grad = |p: Vec2| {
        let gx = (f.sample(p + Vec2::new(h, 0.0)) - f.sample(p - Vec2::new(h, 0.0))) / (2.0 * h);
        let gy = (f.sample(p + Vec2::new(0.0, h)) - f.sample(p - Vec2::new(0.0, h))) / (2.0 * h);
        Vec2::new(gx, gy).norm().max(0.25)
    };
    let mut total = 0.0;
    for c in cs {
        let m = c.points.len();
        let segs = if c.closed { m } else { m.saturating_sub(1) };
        for k in 0..segs {
            let (a, b) = (c.points[k], c.points[(k + 1) % m]);
            total += a.dist(b) * w / grad(a.lerp(b, 0.5));
        }
    }
    total
}

fn judge(fat: f64, threshold: f64, prev: Option<&FatteningReport>) -> FatteningVerdict {
    match prev {
        Some(p) if p.verdict == FatteningVerdict::Fattening => FatteningVerdict::Fattening,
        Some(p) if p.fat_volume > p.threshold && fat > threshold => FatteningVerdict::Fattening,
        _ => FatteningVerdict::NonFatteningSoFar,
    }
}

/// Offset tracks of a single evolution.
///
/// Between reinitializations the levels near a thin neck spread apart at
/// very different speeds, so offsets are taken from a distance field.
pub fn track_inner_outer(state: &LevelSetState) -> InnerOuterTrack {
    offset_tracks(&distance_field(state), state.t, THIN_TOL_FACTOR * state.h())
}

fn distance_field(state: &LevelSetState) -> ScalarField2D {
    reinitialize(&state.phi).unwrap_or_else(|_| state.phi.clone())
}

fn offset_tracks(phi: &ScalarField2D, t: f64, tau: f64) -> InnerOuterTrack {
    InnerOuterTrack { t, outer: contours(phi, 0.5 * tau), inner: contours(phi, -0.5 * tau) }
}

/// Fattening diagnostic of a single evolution; `prev` is the report of the
/// previous sample, since fattening needs two consecutive samples above
/// threshold and is permanent once declared.
pub fn fattening_report(state: &LevelSetState, prev: Option<&FatteningReport>) -> FatteningReport {
    let h = state.h();
    let tau = THIN_TOL_FACTOR * h;
    let phi = distance_field(state);
    let band = area_below(&phi, tau) - area_below(&phi, -tau);
    let expected = weighted_length(&phi, &contours(&phi, 0.0), 2.0 * tau);
    let fat = (band - expected).max(0.0);
    let threshold = FAT_FACTOR * h * h;
    let discrepancy = (offset_tracks(&phi, state.t, tau).hausdorff(h) - tau).max(0.0);
    FatteningReport {
        t: state.t,
        fat_volume: fat,
        discrepancy,
        verdict: judge(fat, threshold, prev),
        band_volume: band,
        expected_volume: expected,
        threshold,
    }
}

/// A level set evolution together with its inner/outer realization.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerOuter {
    Offset(LevelSetState),
    TwoRun {
        outer: LevelSetState,
        inner: LevelSetState,
        /// Area between the two runs at the start.
        initial_gap: f64,
    },
}

fn gap(outer: &LevelSetState, inner: &LevelSetState) -> f64 {
    area_below(&outer.phi, 0.0) - area_below(&inner.phi, 0.0)
}

impl InnerOuter {
    pub fn new(state: LevelSetState, mode: TrackMode) -> Result<Self> {
        Ok(match mode {
            TrackMode::Offset => InnerOuter::Offset(state),
            TrackMode::TwoRun => {
                let c = 0.5 * state.h();
                let (outer, inner) = (state.shifted(-c)?, state.shifted(c)?);
                let initial_gap = gap(&outer, &inner);
                InnerOuter::TwoRun { outer, inner, initial_gap }
            }
        })
    }

    pub fn mode(&self) -> TrackMode {
        match self {
            InnerOuter::Offset(_) => TrackMode::Offset,
            InnerOuter::TwoRun { .. } => TrackMode::TwoRun,
        }
    }

    /// The evolution whose zero set is the outer flow.
    pub fn primary(&self) -> &LevelSetState {
        match self {
            InnerOuter::Offset(s) => s,
            InnerOuter::TwoRun { outer, .. } => outer,
        }
    }

    pub fn t(&self) -> f64 {
        self.primary().t
    }

    pub fn h(&self) -> f64 {
        self.primary().h()
    }

    pub fn evolve_until(self, t_end: f64) -> Result<Self> {
        Ok(match self {
            InnerOuter::Offset(s) => InnerOuter::Offset(evolve_until(s, t_end)?),
            InnerOuter::TwoRun { outer, inner, initial_gap } => {
                let (o, i) = rayon::join(|| evolve_until(outer, t_end), || evolve_until(inner, t_end));
                InnerOuter::TwoRun { outer: o?, inner: i?, initial_gap }
            }
        })
    }

    pub fn track(&self) -> InnerOuterTrack {
        match self {
            InnerOuter::Offset(s) => track_inner_outer(s),
            InnerOuter::TwoRun { outer, inner, .. } => {
                InnerOuterTrack { t: outer.t, outer: outer.zero_set(), inner: inner.zero_set() }
            }
        }
    }

    pub fn report(&self, prev: Option<&FatteningReport>) -> FatteningReport {
        match self {
            InnerOuter::Offset(s) => fattening_report(s, prev),
            InnerOuter::TwoRun { outer, inner, initial_gap } => {
                let h = outer.h();
                // enclosed areas of nested smooth flows change at equal
                // rates, so a sharp pair keeps its initial gap area
                let band = gap(outer, inner);
                let expected = *initial_gap;
                let fat = (band - expected).max(0.0);
                let threshold = FAT_FACTOR * h * h;
                let discrepancy = (self.track().hausdorff(h) - h).max(0.0);
                FatteningReport {
                    t: outer.t,
                    fat_volume: fat,
                    discrepancy,
                    verdict: judge(fat, threshold, prev),
                    band_volume: band,
                    expected_volume: expected,
                    threshold,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FatteningSeries {
    pub reports: Vec<FatteningReport>,
    /// Zero-set component count of the outer flow at each sample.
    pub components: Vec<usize>,
    pub tracks: Vec<InnerOuterTrack>,
    pub verdict: Verdict,
    pub final_state: InnerOuter,
}

impl FatteningSeries {
    pub const CSV_HEADER: &'static str = "t,fat_volume,discrepancy,verdict";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.reports {
            s.push_str(&format!("{},{},{},{}\n", r.t, r.fat_volume, r.discrepancy, r.verdict.as_str()));
        }
        s
    }

    pub fn fattening(&self) -> bool {
        self.reports.last().is_some_and(|r| r.verdict == FatteningVerdict::Fattening)
    }

    /// Longest run of strictly increasing consecutive `fat_volume` values
    /// (counted in samples).
    pub fn longest_fat_growth(&self) -> usize {
        let mut best = 1;
        let mut cur = 1;
        for w in self.reports.windows(2) {
            if w[1].fat_volume > w[0].fat_volume && w[0].fat_volume > 0.0 {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 1;
            }
        }
        if self.reports.is_empty() {
            0
        } else {
            best
        }
    }
}

/// Sample the fattening diagnostic every `sample_dt` up to `t_end`.
pub fn fattening_series(
    run: InnerOuter,
    scenario: &str,
    t_end: f64,
    sample_dt: f64,
    keep_tracks: bool,
) -> Result<FatteningSeries> {
    let count = (t_end / sample_dt + 1e-9).floor() as usize;
    let t0 = run.t();
    let mut run = run;
    let mut reports: Vec<FatteningReport> = Vec::new();
    let mut components = Vec::new();
    let mut tracks = Vec::new();
    let mut flagged = 0;
    for k in 0..=count {
        run = run.evolve_until(t0 + k as f64 * sample_dt)?;
        flagged += run.primary().flagged;
        reports.push(run.report(reports.last()));
        components.push(run.primary().zero_set().len());
        if keep_tracks {
            tracks.push(run.track());
        }
    }
    let h = run.h();
    let mut verdict = Verdict::new(scenario);
    let fat = reports.last().is_some_and(|r| r.verdict == FatteningVerdict::Fattening);
    verdict.fattening = Some(fat);
    if let Some(k) = reports.iter().position(|r| r.verdict == FatteningVerdict::Fattening) {
        verdict.note(Some(k), Some(reports[k].t), "fattening: fat_volume above threshold on consecutive samples");
    }
    if let Some(k) = reports.iter().position(|r| r.discrepancy > 2.0 * h) {
        verdict.note(Some(k), Some(reports[k].t), "inner and outer flows differ by more than 2h");
    }
    if flagged > 0 {
        verdict.note(None, None, format!("gradient floor used at {flagged} node-steps"));
    }
    verdict.tolerance("h", h);
    verdict.tolerance("thin_tol", THIN_TOL_FACTOR * h);
    verdict.tolerance("fat_threshold", FAT_FACTOR * h * h);
    verdict.tolerance("discrepancy", 2.0 * h);
    verdict.tolerance("cfl", super::CFL);
    verdict.tolerance("grad_floor", super::GRAD_FLOOR);
    Ok(FatteningSeries { reports, components, tracks, verdict, final_state: run })
}

#[cfg(test)]
mod tests {
    use super::super::{disk_state, LsMode};
    use super::*;

    #[test]
    fn shrinking_circle_does_not_fatten() {
        let h = 1.0 / 32.0;
        let s = disk_state(1.0, Vec2::new(0.0, 0.0), h, 1.25, LsMode::Planar).unwrap();
        let series =
            fattening_series(InnerOuter::new(s, TrackMode::Offset).unwrap(), "circle", 0.4, 0.05, true).unwrap();
        assert!(!series.fattening());
        for (r, tr) in series.reports.iter().zip(&series.tracks) {
            assert!(r.discrepancy < 2.0 * h, "{r:?}");
            assert!(r.fat_volume <= r.threshold, "{r:?}");
            assert!(!tr.outer.is_empty());
        }
        assert_eq!(series.verdict.fattening, Some(false));
    }

    #[test]
    fn two_run_circle_does_not_fatten() {
        let h = 1.0 / 32.0;
        let s = disk_state(1.0, Vec2::new(0.0, 0.0), h, 1.25, LsMode::Planar).unwrap();
        let series =
            fattening_series(InnerOuter::new(s, TrackMode::TwoRun).unwrap(), "circle", 0.3, 0.05, false).unwrap();
        assert!(!series.fattening());
        assert!(series.reports.iter().all(|r| r.discrepancy < 2.0 * h));
    }

    #[test]
    fn verdict_needs_two_consecutive_samples() {
        let r = |fat: f64, v| FatteningReport {
            t: 0.0,
            fat_volume: fat,
            discrepancy: 0.0,
            verdict: v,
            band_volume: 0.0,
            expected_volume: 0.0,
            threshold: 1.0,
        };
        assert_eq!(judge(2.0, 1.0, None), FatteningVerdict::NonFatteningSoFar);
        assert_eq!(
            judge(2.0, 1.0, Some(&r(0.5, FatteningVerdict::NonFatteningSoFar))),
            FatteningVerdict::NonFatteningSoFar
        );
        assert_eq!(judge(2.0, 1.0, Some(&r(1.5, FatteningVerdict::NonFatteningSoFar))), FatteningVerdict::Fattening);
        assert_eq!(judge(0.0, 1.0, Some(&r(0.0, FatteningVerdict::Fattening))), FatteningVerdict::Fattening);
    }
}
