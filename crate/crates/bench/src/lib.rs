//! Fixtures shared by the kernel benchmarks.

use mcflab::csf::CsfState;
use mcflab::geometry::{shapes, ScalarField2D, Vec2};
use mcflab::graphical::GraphPair;
use mcflab::levelset::{disk_state, LevelSetState, LsMode};

/// Unit circle with `n` vertices.
pub fn circle_state(n: usize) -> CsfState {
    CsfState::new(shapes::circle(Vec2::ZERO, 1.0, n))
}

/// Signed distance to the unit circle on an `(2/h + 1)²`-ish grid.
pub fn disk(h: f64) -> LevelSetState {
    disk_state(1.0, Vec2::ZERO, h, 1.25, LsMode::Planar).expect("valid disk grid")
}

/// Smooth graph pair on the unit square with `n × n` nodes.
pub fn graph_pair(n: usize) -> GraphPair {
    let h = 1.0 / (n - 1) as f64;
    let u = ScalarField2D::from_fn(n, n, h, Vec2::ZERO, |p| 0.3 * (2.0 * p.x + p.y).sin()).expect("grid");
    let v = ScalarField2D::from_fn(n, n, h, Vec2::ZERO, |p| 0.4 * p.x * p.y).expect("grid");
    GraphPair::new(u, v).expect("same grid")
}
