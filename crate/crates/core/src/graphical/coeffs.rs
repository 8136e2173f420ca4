use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::gauss_legendre_unit;
use super::{speed_field, Derivs, GraphPair};
use crate::error::{Error, Result};
use crate::geometry::{ScalarField2D, Vec2};

/// Coefficients of `w_t = ∂_i(a^{ij} ∂_j w) + b^j ∂_j w` for `w = v - u`.
///
/// `a` holds `(a11, a12, a22)` per node; `b` is zero on boundary nodes,
/// where the divergence correction is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffCoefficients {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: Vec2,
    pub a: Vec<[f64; 3]>,
    pub b: Vec<[f64; 2]>,
    /// `C` such that the eigenvalues of `a` lie in `[1/(1+C), 1]`.
    pub c_bound: f64,
}

impl DiffCoefficients {
    /// Eigenvalues `(min, max)` of `a` at node `k`.
    pub fn eigenvalues(&self, k: usize) -> (f64, f64) {
        let [a11, a12, a22] = self.a[k];
        if self.dim == 1 {
            return (a11, a11);
        }
        let m = 0.5 * (a11 + a22);
        let r = (0.25 * (a11 - a22).powi(2) + a12 * a12).sqrt();
        (m - r, m + r)
    }

    fn interior(&self, i: usize, j: usize) -> bool {
        i > 0 && i + 1 < self.nx && (self.dim == 1 || (j > 0 && j + 1 < self.ny))
    }

    fn in_middle(&self, i: usize, j: usize) -> bool {
        let mid = |k: usize, n: usize| {
            let s = k as f64 / (n - 1) as f64;
            (0.25..=0.75).contains(&s)
        };
        mid(i, self.nx) && (self.dim == 1 || mid(j, self.ny))
    }

    /// Whether every node's eigenvalues sit in `[1/(1+C) - tol, 1 + tol]`.
    pub fn ellipticity_ok(&self, tol: f64) -> bool {
        let lo = 1.0 / (1.0 + self.c_bound) - tol;
        (0..self.a.len()).all(|k| {
            let (e0, e1) = self.eigenvalues(k);
            e0 >= lo && e1 <= 1.0 + tol
        })
    }
}

/// `∂F/∂P_ij` and `∂F/∂q^j` at `(P, q)` for the graphical MCF operator.
fn f_derivs(d: &Derivs) -> ([f64; 3], [f64; 2]) {
    let (q1, q2) = (d.gx, d.gy);
    let s = 1.0 + q1 * q1 + q2 * q2;
    // the q q^T / s part only; the identity is added exactly after quadrature
    let a = [q1 * q1 / s, q1 * q2 / s, q2 * q2 / s];
    let pqq = d.hxx * q1 * q1 + 2.0 * d.hxy * q1 * q2 + d.hyy * q2 * q2;
    // -(P_jb q^b + P_aj q^a)/s + 2 q^j P(q,q)/s²
    let pq1 = d.hxx * q1 + d.hxy * q2;
    let pq2 = d.hxy * q1 + d.hyy * q2;
    let fq = [-2.0 * pq1 / s + 2.0 * q1 * pqq / (s * s), -2.0 * pq2 / s + 2.0 * q2 * pqq / (s * s)];
    (a, fq)
}

fn node_derivs(f: &ScalarField2D, i: usize, j: usize, interior: bool) -> Derivs {
    if interior {
        Derivs::at(f, i, j)
    } else {
        let g = f.gradient(i, j);
        Derivs { gx: g.x, gy: g.y, ..Derivs::default() }
    }
}

/// Assemble `a^{ij}`, `b^j` and `C` for `w = v - u` by 16-point
/// Gauss-Legendre quadrature along `w_θ = θ v + (1-θ) u`.
pub fn assemble_coefficients(pair: &GraphPair) -> DiffCoefficients {
    let (u, v) = (&pair.u, &pair.v);
    let (nx, ny) = (u.nx(), u.ny());
    let dim = u.dim();
    let rule = gauss_legendre_unit();
    let interior = |i: usize, j: usize| i > 0 && i + 1 < nx && (dim == 1 || (j > 0 && j + 1 < ny));
    let per_node: Vec<([f64; 3], [f64; 2], f64)> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let inner = interior(i, j);
            let du = node_derivs(u, i, j, inner);
            let dv = node_derivs(v, i, j, inner);
            let mut a = [0.0; 3];
            let mut fq = [0.0; 2];
            let mut gmax: f64 = 0.0;
            for &(theta, wt) in rule {
                let d = du.lerp(&dv, theta);
                gmax = gmax.max(d.grad().norm());
                let (ai, fi) = f_derivs(&d);
                for m in 0..3 {
                    a[m] += wt * ai[m];
                }
                for m in 0..2 {
                    fq[m] += wt * fi[m];
                }
            }
            ([1.0 - a[0], -a[1], 1.0 - a[2]], fq, gmax)
        })
        .collect();
    let a: Vec<[f64; 3]> = per_node.iter().map(|p| p.0).collect();
    let g = per_node.iter().fold(0.0f64, |m, p| m.max(p.2));
    let h = u.h();
    let at = |i: usize, j: usize| a[j * nx + i];
    let b: Vec<[f64; 2]> = (0..nx * ny)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            if !interior(i, j) {
                return [0.0, 0.0];
            }
            let fq = per_node[k].1;
            // ∂_i a^{ij} by central differences
            let d1a11 = (at(i + 1, j)[0] - at(i - 1, j)[0]) / (2.0 * h);
            if dim == 1 {
                return [fq[0] - d1a11, 0.0];
            }
            let d1a12 = (at(i + 1, j)[1] - at(i - 1, j)[1]) / (2.0 * h);
            let d2a12 = (at(i, j + 1)[1] - at(i, j - 1)[1]) / (2.0 * h);
            let d2a22 = (at(i, j + 1)[2] - at(i, j - 1)[2]) / (2.0 * h);
            [fq[0] - d1a11 - d2a12, fq[1] - d1a12 - d2a22]
        })
        .collect();
    DiffCoefficients { dim, nx, ny, h, origin: u.origin(), a, b, c_bound: g * g }
}

/// Max-norm over the middle half of the residual
/// `w_t - ∂_i(a^{ij} ∂_j w) - b^j ∂_j w`, with `w_t` the discrete
/// right-hand side difference `F_h(v) - F_h(u)` (exactly the explicit Euler
/// difference quotient).
pub fn residual_max(pair: &GraphPair) -> f64 {
    let c = assemble_coefficients(pair);
    let w = pair.w();
    let (nx, ny, h) = (c.nx, c.ny, c.h);
    let su = speed_field(&pair.u);
    let sv = speed_field(&pair.v);
    let grad = |i: usize, j: usize| Derivs::at(&w, i, j);
    let flux = |i: usize, j: usize| {
        let d = grad(i, j);
        let [a11, a12, a22] = c.a[j * nx + i];
        if c.dim == 1 {
            [a11 * d.gx, 0.0]
        } else {
            [a11 * d.gx + a12 * d.gy, a12 * d.gx + a22 * d.gy]
        }
    };
    let mut worst: f64 = 0.0;
    let deep = |i: usize, j: usize| i >= 2 && i + 2 < nx && (c.dim == 1 || (j >= 2 && j + 2 < ny));
    for j in 0..ny {
        for i in 0..nx {
            if !c.in_middle(i, j) || !deep(i, j) {
                continue;
            }
            let k = j * nx + i;
            let mut div = (flux(i + 1, j)[0] - flux(i - 1, j)[0]) / (2.0 * h);
            if c.dim == 2 {
                div += (flux(i, j + 1)[1] - flux(i, j - 1)[1]) / (2.0 * h);
            }
            let d = grad(i, j);
            let adv = c.b[k][0] * d.gx + c.b[k][1] * d.gy;
            worst = worst.max((sv[k] - su[k] - div - adv).abs());
        }
    }
    worst
}

/// Checks of the hypotheses placed on the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub ellipticity_ok: bool,
    /// Largest `|a(x,t) - a(y,s)| / sqrt(|x-y|² + |t-s|)` over node pairs
    /// within `4h` in the middle half, across all slices.
    pub lipschitz_est: f64,
    /// `sup |b|` over the middle half.
    pub b_sup: f64,
    #[serde(rename = "C_bound")]
    pub c_bound: f64,
    /// Sup of the zero-order coefficient; the difference equation has none.
    pub c_sup: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Validate coefficients sampled on at least three time slices.
pub fn verify_coefficient_hypotheses(slices: &[(f64, DiffCoefficients)]) -> Result<HypothesisReport> {
    if slices.len() < 3 {
        return Err(Error::InsufficientSamples(format!("{} coefficient slices, need 3", slices.len())));
    }
    let c_bound = slices.iter().fold(0.0f64, |m, s| m.max(s.1.c_bound));
    let first = &slices[0].1;
    let (nx, ny, h) = (first.nx, first.ny, first.h);
    if slices.iter().any(|s| s.1.nx != nx || s.1.ny != ny || s.1.h != h) {
        return Err(Error::GridMismatch);
    }
    let mut min_e = f64::INFINITY;
    let mut max_e = f64::NEG_INFINITY;
    let mut b_sup: f64 = 0.0;
    let mut ok = true;
    for (_, c) in slices {
        ok &= c.ellipticity_ok(1e-9);
        for k in 0..c.a.len() {
            let (e0, e1) = c.eigenvalues(k);
            min_e = min_e.min(e0);
            max_e = max_e.max(e1);
            let (i, j) = (k % nx, k / nx);
            if c.in_middle(i, j) && c.interior(i, j) {
                b_sup = b_sup.max(c.b[k][0].hypot(c.b[k][1]));
            }
        }
    }
    ok &= min_e >= 1.0 / (1.0 + c_bound) - 1e-9;
    let reach: i64 = 4;
    let jr = if first.dim == 1 { 0 } else { reach };
    let nodes: Vec<(usize, usize)> =
        (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).filter(|&(i, j)| first.in_middle(i, j)).collect();
    let mut lip: f64 = 0.0;
    for (sa, (ta, ca)) in slices.iter().enumerate() {
        for (tb, cb) in &slices[sa..] {
            let dt = (ta - tb).abs();
            let local = nodes
                .par_iter()
                .map(|&(i, j)| {
                    let mut m: f64 = 0.0;
                    for dj in -jr..=jr {
                        for di in -reach..=reach {
                            let (ii, jj) = (i as i64 + di, j as i64 + dj);
                            if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                                continue;
                            }
                            let dx2 = ((di * di + dj * dj) as f64) * h * h;
                            if dx2 > (4.0 * h).powi(2) + 1e-15 || (dx2 == 0.0 && dt == 0.0) {
                                continue;
                            }
                            let p = ca.a[j * nx + i];
                            let q = cb.a[jj as usize * nx + ii as usize];
                            let diff =
                                ((p[0] - q[0]).powi(2) + 2.0 * (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
                            m = m.max(diff / (dx2 + dt).sqrt());
                        }
                    }
                    m
                })
                .reduce(|| 0.0, f64::max);
            lip = lip.max(local);
        }
    }
    Ok(HypothesisReport {
        ellipticity_ok: ok,
        lipschitz_est: lip,
        b_sup,
        c_bound,
        c_sup: 0.0,
        min_eigenvalue: min_e,
        max_eigenvalue: max_e,
    })
}
