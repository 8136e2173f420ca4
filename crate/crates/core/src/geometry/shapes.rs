//! Parametric test curves sampled into polylines.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use super::{Polyline, Vec2};

fn sample(n: usize, offset: f64, f: impl Fn(f64) -> Vec2) -> Polyline {
    let pts = (0..n).map(|i| f(TAU * (i as f64 + offset) / n as f64)).collect();
    Polyline::closed(pts).expect("parametric curve samples are distinct")
}

/// Counterclockwise circle, vertex 0 at angle 0.
pub fn circle(center: Vec2, r: f64, n: usize) -> Polyline {
    sample(n, 0.0, |t| center + Vec2::from_polar(r, t))
}

/// Counterclockwise ellipse with semi-axes `a` (x) and `b` (y), sampled
/// uniformly in the parameter angle.
pub fn ellipse(center: Vec2, a: f64, b: f64, n: usize) -> Polyline {
    sample(n, 0.0, |t| center + Vec2::new(a * t.cos(), b * t.sin()))
}

/// Lemniscate of Gerono scaled by `scale`; a single crossing at the origin.
/// Samples are offset by half a step so no vertex sits on the crossing.
pub fn figure_eight(scale: f64, n: usize) -> Polyline {
    sample(n, 0.5, |t| Vec2::new(scale * t.sin(), scale * 0.5 * (2.0 * t).sin()))
}

/// Planar projection of the trefoil knot: three transverse self-crossings.
pub fn trefoil(scale: f64, n: usize) -> Polyline {
    sample(n, 0.5, |t| Vec2::new(scale * (t.sin() + 2.0 * (2.0 * t).sin()), scale * (t.cos() - 2.0 * (2.0 * t).cos())))
}

/// Star-shaped smooth closed curve `r(θ) = radius (1 + Σ a_k cos(kθ + φ_k))`
/// with random low-frequency coefficients bounded so the curve stays embedded.
pub fn random_smooth<R: Rng>(rng: &mut R, center: Vec2, radius: f64, n: usize) -> Polyline {
    let modes: Vec<(f64, f64, f64)> = (2..=4)
        .map(|k| {
            let amp = rng.gen_range(0.0..0.12) / k as f64;
            let phase = rng.gen_range(0.0..TAU);
            (k as f64, amp, phase)
        })
        .collect();
    sample(n, 0.0, |t| {
        let r = radius * (1.0 + modes.iter().map(|&(k, a, p)| a * (k * t + p).cos()).sum::<f64>());
        center + Vec2::from_polar(r, t)
    })
}

/// Stadium: a `2 half_len` straight section capped by semicircles of `radius`.
pub fn stadium(half_len: f64, radius: f64, n: usize) -> Polyline {
    let straight = 2.0 * half_len;
    let total = 2.0 * straight + TAU * radius;
    sample(n, 0.0, |t| {
        let s = t / TAU * total;
        if s < straight {
            Vec2::new(-half_len + s, -radius)
        } else if s < straight + PI * radius {
            let a = (s - straight) / radius - PI / 2.0;
            Vec2::new(half_len, 0.0) + Vec2::from_polar(radius, a)
        } else if s < 2.0 * straight + PI * radius {
            Vec2::new(half_len - (s - straight - PI * radius), radius)
        } else {
            let a = (s - 2.0 * straight - PI * radius) / radius + PI / 2.0;
            Vec2::new(-half_len, 0.0) + Vec2::from_polar(radius, a)
        }
    })
}
