//! Closed-form laws the solvers must reproduce.

use mcflab::axisym::{self, cylinder_profile, sphere_profile, Axis};
use mcflab::csf::{self, CsfState};
use mcflab::geometry::{resample, shapes, ScalarField2D, Vec2};
use mcflab::graphical::{gauss_legendre, step_graphical};
use mcflab::levelset::{self, disk_state, mean_radius, LsMode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // any embedded closed curve loses area at rate 2π
    #[test]
    fn csf_area_rate(seed in 0u64..1000, radius in 0.8..1.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = resample(&shapes::random_smooth(&mut rng, Vec2::ZERO, radius, 2048), 0.02).unwrap();
        let a0 = c.signed_area();
        let t = 0.05;
        let s = csf::evolve_until(CsfState::new(c), t).unwrap();
        let lost = a0 - s.curve.signed_area();
        prop_assert!((lost - 2.0 * std::f64::consts::PI * t).abs() < 5e-3, "lost {}", lost);
    }

    #[test]
    fn gauss_legendre_exact_on_polynomials(n in 1usize..12, k in 0usize..23) {
        prop_assume!(k < 2 * n);
        let (x, w) = gauss_legendre(n);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
        let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k + 1) as f64 };
        prop_assert!((q - exact).abs() < 1e-12, "n {} k {}: {} vs {}", n, k, q, exact);
    }

    #[test]
    fn planes_are_stationary_graphs(a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let f = ScalarField2D::from_fn(17, 17, 1.0 / 16.0, Vec2::ZERO, |p| a * p.x + b * p.y).unwrap();
        let g = step_graphical(&f, 1e-4).unwrap();
        for (u, v) in f.values().iter().zip(g.values()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }
}

fn mean_norm_sq(v: &[Vec2]) -> f64 {
    let r = v.iter().map(|p| p.norm()).sum::<f64>() / v.len() as f64;
    r * r
}

#[test]
fn spheres_shrink_at_rate_2n() {
    for n in [2, 3, 4] {
        let t = 0.05;
        let s = axisym::evolve_until(sphere_profile(1.0, 0.0, n, 400).unwrap(), t).unwrap();
        let r2 = mean_norm_sq(s.profile.vertices());
        let exact = 1.0 - 2.0 * n as f64 * t;
        assert!((r2 - exact).abs() < 2e-3, "n = {n}: {r2} vs {exact}");
    }
}

#[test]
fn cylinder_shrinks_at_rate_2_n_minus_1() {
    let n = 3;
    let t = 0.1;
    let s = axisym::evolve_until(cylinder_profile(1.0, 1.0, n, 100).unwrap(), t).unwrap();
    let r = s.profile.vertices().iter().map(|p| p.x).sum::<f64>() / s.profile.len() as f64;
    let exact = (1.0 - 2.0 * (n - 1) as f64 * t).sqrt();
    assert!((r - exact).abs() < 1e-3, "{r} vs {exact}");
}

#[test]
fn level_set_circle_law() {
    let h = 1.0 / 64.0;
    let s = levelset::evolve_until(disk_state(1.0, Vec2::ZERO, h, 1.25, LsMode::Planar).unwrap(), 0.2).unwrap();
    let r = mean_radius(&s, Vec2::ZERO).unwrap();
    assert!((r * r - 0.6).abs() < 3.0 * h, "r² = {}", r * r);
}

#[test]
fn level_set_sphere_law() {
    let h = 1.0 / 64.0;
    let mode = LsMode::Axisym { n: 2, axis: Axis::Y };
    let s = levelset::evolve_until(disk_state(1.0, Vec2::ZERO, h, 1.25, mode).unwrap(), 0.1).unwrap();
    let r = mean_radius(&s, Vec2::ZERO).unwrap();
    assert!((r * r - 0.6).abs() < 3.0 * h, "r² = {}", r * r);
}

#[test]
fn csf_circle_vanishes_near_half() {
    let s = CsfState::new(shapes::circle(Vec2::ZERO, 1.0, 256));
    let late = csf::evolve_until(s, 0.45).unwrap();
    let r2 = mean_norm_sq(late.curve.vertices());
    assert!((r2 - 0.1).abs() < 5e-3, "{r2}");
}
