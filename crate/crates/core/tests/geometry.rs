use std::f64::consts::PI;

use mcflab::geometry::cloud::{box_dimension_of, dyadic_scales, hausdorff_distance};
use mcflab::geometry::{contours, polyline_intersections, resample, shapes, Polyline, ScalarField2D, Vec2};
use mcflab::verdict::{counts_as_values, scan_nonincreasing};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Vec2> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resample_keeps_shape_and_spacing(r in 0.3..3.0f64, h_frac in 0.005..0.05f64) {
        let c = shapes::circle(Vec2::ZERO, r, 2048);
        let h = h_frac * r;
        let s = resample(&c, h).unwrap();
        prop_assert!(s.is_closed());
        prop_assert!(s.edge_ratio() < 1.05);
        prop_assert!(s.max_edge() <= 1.05 * h);
        prop_assert!((s.length() - c.length()).abs() / c.length() < 1e-3);
    }

    #[test]
    fn circle_area_and_orientation(r in 0.1..10.0f64, c in point()) {
        let p = shapes::circle(c, r, 1024);
        prop_assert!((p.signed_area() - PI * r * r).abs() < 1e-4 * r * r);
        prop_assert_eq!(p.turning_number(), 1);
        prop_assert_eq!(p.reversed().turning_number(), -1);
        prop_assert!(p.centroid().dist(c) < 1e-9 * (1.0 + c.norm()));
    }

    #[test]
    fn translation_moves_everything(d in point()) {
        let p = shapes::ellipse(Vec2::ZERO, 1.5, 0.7, 256);
        let q = p.translated(d);
        prop_assert!((q.signed_area() - p.signed_area()).abs() < 1e-9);
        prop_assert!((q.centroid() - p.centroid() - d).norm() < 1e-9);
    }

    #[test]
    fn two_circles_cross_twice_or_never(d in 0.05..3.5f64, angle in 0.0..std::f64::consts::TAU) {
        prop_assume!((d - 2.0).abs() > 0.05);
        let a = shapes::circle(Vec2::ZERO, 1.0, 1024);
        let b = shapes::circle(Vec2::from_polar(d, angle), 1.0, 1024);
        let cloud = polyline_intersections(&a, &b);
        let expected = if d < 2.0 { 2 } else { 0 };
        prop_assert_eq!(cloud.len(), expected);
        let centre = Vec2::from_polar(d, angle);
        for p in cloud.points() {
            prop_assert!((p.norm() - 1.0).abs() < 1e-4);
            prop_assert!((p.dist(centre) - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn hausdorff_is_a_metric_on_samples(
        a in prop::collection::vec(point(), 1..40),
        b in prop::collection::vec(point(), 1..40),
        c in prop::collection::vec(point(), 1..40),
    ) {
        prop_assert_eq!(hausdorff_distance(&a, &a), 0.0);
        let ab = hausdorff_distance(&a, &b);
        prop_assert!((ab - hausdorff_distance(&b, &a)).abs() < 1e-12);
        prop_assert!(ab <= hausdorff_distance(&a, &c) + hausdorff_distance(&c, &b) + 1e-12);
    }

    #[test]
    fn shift_bounds_hausdorff(a in prop::collection::vec(point(), 1..40), d in point()) {
        let b: Vec<Vec2> = a.iter().map(|&p| p + d).collect();
        prop_assert!(hausdorff_distance(&a, &b) <= d.norm() + 1e-12);
    }

    #[test]
    fn bilinear_sampling_is_exact_on_planes(
        a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64, s in 0.0..1.0f64, t in 0.0..1.0f64,
    ) {
        let f = ScalarField2D::from_fn(17, 17, 1.0 / 16.0, Vec2::ZERO, |p| a * p.x + b * p.y + c).unwrap();
        let p = Vec2::new(s, t);
        prop_assert!((f.sample(p) - (a * s + b * t + c)).abs() < 1e-12);
        let g = f.gradient(8, 8);
        prop_assert!((g.x - a).abs() < 1e-9 && (g.y - b).abs() < 1e-9);
    }

    #[test]
    fn nonincreasing_series_scan_clean(mut v in prop::collection::vec(0usize..20, 1..50)) {
        v.sort_unstable_by(|a, b| b.cmp(a));
        let scan = scan_nonincreasing(&counts_as_values(&v), 0.0);
        prop_assert!(scan.monotone);
        prop_assert!(scan.forgiven.is_empty());
    }

    #[test]
    fn sustained_rise_is_a_violation(base in 0usize..10, rise in 1usize..5, at in 1usize..10, tail in 2usize..10) {
        let mut v = vec![base; at];
        v.extend(std::iter::repeat_n(base + rise, tail));
        let scan = scan_nonincreasing(&counts_as_values(&v), 0.0);
        prop_assert!(!scan.monotone);
        prop_assert_eq!(scan.violation, Some(at));
    }

    #[test]
    fn single_flicker_is_forgiven(base in 0usize..10, at in 1usize..10, tail in 1usize..10) {
        let mut v = vec![base; at];
        v.push(base + 1);
        v.extend(std::iter::repeat_n(base, tail));
        let scan = scan_nonincreasing(&counts_as_values(&v), 0.0);
        prop_assert!(scan.monotone);
        prop_assert_eq!(scan.forgiven, vec![at]);
    }

    #[test]
    fn segment_has_box_dimension_one(len in 0.5..4.0f64, angle in 0.0..PI, n in 200usize..800) {
        let dir = Vec2::from_polar(1.0, angle);
        let pts: Vec<Vec2> = (0..n).map(|k| dir * (len * k as f64 / (n - 1) as f64)).collect();
        let d = box_dimension_of(&pts, &dyadic_scales(&pts, 5)).unwrap().unwrap();
        prop_assert!((d - 1.0).abs() < 0.2, "dimension {}", d);
    }
}

#[test]
fn distance_field_contour_is_the_circle() {
    let h = 1.0 / 32.0;
    let f = ScalarField2D::from_fn(97, 97, h, Vec2::new(-1.5, -1.5), |p| p.norm() - 1.0).unwrap();
    let cs = contours(&f, 0.0);
    assert_eq!(cs.len(), 1);
    for p in &cs[0].points {
        assert!((p.norm() - 1.0).abs() < h * h, "{p:?}");
    }
}

#[test]
fn open_and_degenerate_polylines() {
    assert!(Polyline::open(vec![Vec2::ZERO]).is_err());
    let p = Polyline::open(vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)]).unwrap();
    assert_eq!(p.edge_count(), 2);
    assert!((p.length() - 2.0).abs() < 1e-12);
    assert!((p.distance_to(Vec2::new(0.5, 0.5)) - 0.5).abs() < 1e-12);
}
