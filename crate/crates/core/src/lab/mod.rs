//! Scenario runner plumbing: configs, dispatch to the solvers, artifacts and
//! the aggregated report.

mod config;
mod report;
mod run;

pub use config::{
    parse_config, ResolutionBounds, ScenarioConfig, ScenarioKind, SelfCurve, Split, CSF_DEFAULT_H,
    DUMBBELL_DEFAULT_EPS, DUMBBELL_DEFAULT_L, SPLIT_DUMBBELL_L,
};
pub use report::{classify, emit_report, Expectation, Expectations, Outcome, Report, ReportRow};
pub use run::{pair_curves, run_scenario, RunOutcome};

use crate::error::Result;
use crate::geometry::{resample, shapes, Polyline, Vec2};

/// Closed convex test curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Circle { centre: (f64, f64), r: f64 },
    Ellipse { centre: (f64, f64), a: f64, b: f64 },
}

impl Shape {
    /// Polyline with vertex spacing close to `h`.
    pub fn polyline(&self, h: f64) -> Result<Polyline> {
        let dense = match *self {
            Shape::Circle { centre, r } => shapes::circle(Vec2::new(centre.0, centre.1), r, 4096),
            Shape::Ellipse { centre, a, b } => shapes::ellipse(Vec2::new(centre.0, centre.1), a, b, 4096),
        };
        resample(&dense, h)
    }
}

/// Named pair of convex curves for `csf_pair` runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEntry {
    pub name: &'static str,
    pub a: Shape,
    pub b: Shape,
}

const fn circle(x: f64, y: f64, r: f64) -> Shape {
    Shape::Circle { centre: (x, y), r }
}

/// Ten convex pairs: eight circle pairs with exact separation times and two
/// ellipse pairs.
pub const CSF_PAIRS: [PairEntry; 10] = [
    PairEntry { name: "two_circles", a: circle(0.0, 0.0, 1.0), b: circle(1.0, 0.0, 1.0) },
    PairEntry { name: "disjoint_circles", a: circle(0.0, 0.0, 1.0), b: circle(3.0, 0.0, 1.0) },
    PairEntry { name: "unequal_inner", a: circle(0.0, 0.0, 1.0), b: circle(0.8, 0.0, 0.5) },
    PairEntry { name: "unequal_outer", a: circle(0.0, 0.0, 1.0), b: circle(1.2, 0.0, 0.6) },
    PairEntry { name: "diagonal", a: circle(0.0, 0.0, 0.8), b: circle(0.6, 0.6, 0.8) },
    PairEntry { name: "large_small", a: circle(0.0, 0.0, 1.2), b: circle(0.9, 0.0, 0.5) },
    PairEntry { name: "small_pair", a: circle(0.0, 0.0, 0.6), b: circle(0.5, 0.0, 0.4) },
    PairEntry { name: "vertical", a: circle(0.0, 0.0, 1.0), b: circle(0.0, 1.5, 0.9) },
    PairEntry {
        name: "circle_ellipse",
        a: circle(0.0, 0.0, 1.0),
        b: Shape::Ellipse { centre: (0.0, 0.0), a: 1.5, b: 0.6 },
    },
    PairEntry {
        name: "crossed_ellipses",
        a: Shape::Ellipse { centre: (0.0, 0.0), a: 1.2, b: 0.7 },
        b: Shape::Ellipse { centre: (0.4, 0.0), a: 0.6, b: 1.1 },
    },
];

pub fn csf_pair(name: &str) -> Option<&'static PairEntry> {
    CSF_PAIRS.iter().find(|p| p.name == name)
}

impl PairEntry {
    /// Time after which two shrinking circles no longer meet, from the exact
    /// radii `sqrt(r² - 2t)`. `None` unless both curves are circles.
    pub fn exact_separation_time(&self) -> Option<f64> {
        let (Shape::Circle { centre: ca, r: ra }, Shape::Circle { centre: cb, r: rb }) = (self.a, self.b) else {
            return None;
        };
        let d = (ca.0 - cb.0).hypot(ca.1 - cb.1);
        let meet = |t: f64| {
            let (sa, sb) = (ra * ra - 2.0 * t, rb * rb - 2.0 * t);
            if sa <= 0.0 || sb <= 0.0 {
                return false;
            }
            let (a, b) = (sa.sqrt(), sb.sqrt());
            (a - b).abs() <= d && d <= a + b
        };
        if !meet(0.0) {
            return Some(0.0);
        }
        // the meeting times form an interval starting at 0
        let (mut lo, mut hi) = (0.0, 0.5 * ra.min(rb).powi(2));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if meet(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_circle_oracle() {
        let t = csf_pair("two_circles").unwrap().exact_separation_time().unwrap();
        assert!((t - 0.375).abs() < 1e-12);
        assert_eq!(csf_pair("disjoint_circles").unwrap().exact_separation_time(), Some(0.0));
        assert_eq!(csf_pair("circle_ellipse").unwrap().exact_separation_time(), None);
    }

    #[test]
    fn internal_tangency_oracle() {
        // sqrt(1 - 2t) - sqrt(0.25 - 2t) = 0.8
        let t = csf_pair("unequal_inner").unwrap().exact_separation_time().unwrap();
        let gap = (1.0 - 2.0 * t).sqrt() - (0.25 - 2.0 * t).sqrt();
        assert!((gap - 0.8).abs() < 1e-9);
    }

    #[test]
    fn catalog_names_unique() {
        for (i, p) in CSF_PAIRS.iter().enumerate() {
            assert!(CSF_PAIRS[i + 1..].iter().all(|q| q.name != p.name));
        }
    }
}
