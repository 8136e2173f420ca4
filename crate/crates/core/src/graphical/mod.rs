//! Graphical mean curvature flow, the coefficients of the equation solved by
//! the difference of two solutions, and nodal-set tracking.

mod coeffs;
mod nodal;
mod quadrature;

pub use coeffs::{
    assemble_coefficients, residual_max, verify_coefficient_hypotheses, DiffCoefficients, HypothesisReport,
};
pub use nodal::{evolve_pair_and_track_nodal, one_sided_test, NodalRecord, OneSided};
pub use quadrature::{gauss_legendre, gauss_legendre_unit};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ScalarField2D, Vec2};

/// Explicit step limit: `dt <= CFL * h^2`.
pub const CFL: f64 = 0.2;
/// Runtime bound on `|∇u|`.
pub const GRAD_CAP: f64 = 10.0;

/// Central differences at an interior node. Line fields have zero `y` parts.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Derivs {
    pub gx: f64,
    pub gy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl Derivs {
    pub fn at(f: &ScalarField2D, i: usize, j: usize) -> Derivs {
        let h = f.h();
        let c = f.get(i, j);
        let (l, r) = (f.get(i - 1, j), f.get(i + 1, j));
        let mut d = Derivs { gx: (r - l) / (2.0 * h), hxx: (r - 2.0 * c + l) / (h * h), ..Derivs::default() };
        if f.ny() > 1 {
            let (b, t) = (f.get(i, j - 1), f.get(i, j + 1));
            d.gy = (t - b) / (2.0 * h);
            d.hyy = (t - 2.0 * c + b) / (h * h);
            d.hxy =
                (f.get(i + 1, j + 1) - f.get(i - 1, j + 1) - f.get(i + 1, j - 1) + f.get(i - 1, j - 1)) / (4.0 * h * h);
        }
        d
    }

    pub fn grad(&self) -> Vec2 {
        Vec2::new(self.gx, self.gy)
    }

    pub fn lerp(&self, o: &Derivs, s: f64) -> Derivs {
        let m = |a: f64, b: f64| a + (b - a) * s;
        Derivs {
            gx: m(self.gx, o.gx),
            gy: m(self.gy, o.gy),
            hxx: m(self.hxx, o.hxx),
            hxy: m(self.hxy, o.hxy),
            hyy: m(self.hyy, o.hyy),
        }
    }
}

/// `F(D²u, Du) = Δu - D²u(Du, Du) / (1 + |Du|²)`.
pub fn graph_speed(d: &Derivs) -> f64 {
    let q2 = d.gx * d.gx + d.gy * d.gy;
    let hqq = d.hxx * d.gx * d.gx + 2.0 * d.hxy * d.gx * d.gy + d.hyy * d.gy * d.gy;
    d.hxx + d.hyy - hqq / (1.0 + q2)
}

fn is_interior(f: &ScalarField2D, i: usize, j: usize) -> bool {
    i > 0 && i + 1 < f.nx() && (f.ny() == 1 || (j > 0 && j + 1 < f.ny()))
}

/// Largest `|∇u|` over the grid (one-sided differences on the boundary).
pub fn max_gradient(f: &ScalarField2D) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..f.ny() {
        for i in 0..f.nx() {
            m = m.max(f.gradient(i, j).norm());
        }
    }
    m
}

/// Discrete right-hand side `F(D²u, Du)` at every node (0 on the boundary).
pub fn speed_field(f: &ScalarField2D) -> Vec<f64> {
    (0..f.nx() * f.ny())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % f.nx(), k / f.nx());
            if is_interior(f, i, j) {
                graph_speed(&Derivs::at(f, i, j))
            } else {
                0.0
            }
        })
        .collect()
}

/// One explicit step of graphical MCF with boundary values held fixed.
pub fn step_graphical(f: &ScalarField2D, dt: f64) -> Result<ScalarField2D> {
    step_graphical_with_boundary(f, dt, None)
}

/// As [`step_graphical`], with boundary values taken from `boundary` at the
/// new time when given.
pub fn step_graphical_with_boundary(
    f: &ScalarField2D,
    dt: f64,
    boundary: Option<&(dyn Fn(Vec2) -> f64 + Sync)>,
) -> Result<ScalarField2D> {
    let limit = CFL * f.h() * f.h();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    let speed = speed_field(f);
    let values: Vec<f64> = (0..f.nx() * f.ny())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % f.nx(), k / f.nx());
            if is_interior(f, i, j) {
                f.values()[k] + dt * speed[k]
            } else {
                match boundary {
                    Some(b) => b(f.pos(i, j)),
                    None => f.values()[k],
                }
            }
        })
        .collect();
    let out = f.with_values(values)?;
    let g = max_gradient(&out);
    if g > GRAD_CAP {
        return Err(Error::GradientBlowup(g));
    }
    Ok(out)
}

/// Two graphs on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPair {
    pub u: ScalarField2D,
    pub v: ScalarField2D,
    pub t: f64,
}

impl GraphPair {
    pub fn new(u: ScalarField2D, v: ScalarField2D) -> Result<Self> {
        if !u.same_grid(&v) {
            return Err(Error::GridMismatch);
        }
        Ok(GraphPair { u, v, t: 0.0 })
    }

    pub fn w(&self) -> ScalarField2D {
        let vals = self.v.values().iter().zip(self.u.values()).map(|(a, b)| a - b).collect();
        self.v.with_values(vals).expect("same grid")
    }

    pub fn max_dt(&self) -> f64 {
        CFL * self.u.h() * self.u.h()
    }

    pub fn step(&self, dt: f64) -> Result<GraphPair> {
        Ok(GraphPair { u: step_graphical(&self.u, dt)?, v: step_graphical(&self.v, dt)?, t: self.t + dt })
    }

    /// Advance to `t_end` with maximal stable steps.
    pub fn evolve_until(mut self, t_end: f64) -> Result<GraphPair> {
        while self.t < t_end - 1e-15 {
            let dt = self.max_dt().min(t_end - self.t);
            self = self.step(dt)?;
        }
        Ok(self)
    }
}
