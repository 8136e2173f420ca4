use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::Vec2;
use crate::error::{Error, Result};

/// A discrete plane curve. Closed curves do not repeat their first vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    vertices: Vec<Vec2>,
    closed: bool,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec2>, closed: bool) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidPolyline(format!("need at least 3 vertices, got {}", vertices.len())));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidPolyline(format!("non-finite vertex {p:?}")));
        }
        let line = Polyline { vertices, closed };
        if let Some(i) = (0..line.edge_count()).find(|&i| line.edge_length(i) <= 0.0) {
            return Err(Error::InvalidPolyline(format!("zero-length edge {i}")));
        }
        Ok(line)
    }

    pub fn closed(vertices: Vec<Vec2>) -> Result<Self> {
        Self::new(vertices, true)
    }

    pub fn open(vertices: Vec<Vec2>) -> Result<Self> {
        Self::new(vertices, false)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vec2> {
        self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    /// Endpoints of edge `i`.
    #[inline]
    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        a.dist(b)
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.edge_count()).map(|i| self.edge_length(i)).collect()
    }

    pub fn length(&self) -> f64 {
        (0..self.edge_count()).map(|i| self.edge_length(i)).sum()
    }

    pub fn min_edge(&self) -> f64 {
        (0..self.edge_count()).map(|i| self.edge_length(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_edge(&self) -> f64 {
        (0..self.edge_count()).map(|i| self.edge_length(i)).fold(0.0, f64::max)
    }

    pub fn mean_edge(&self) -> f64 {
        self.length() / self.edge_count() as f64
    }

    /// Shortest and longest edge in one pass.
    pub fn edge_extremes(&self) -> (f64, f64) {
        (0..self.edge_count())
            .map(|i| self.edge_length(i))
            .fold((f64::INFINITY, 0.0), |(lo, hi), l| (lo.min(l), hi.max(l)))
    }

    pub fn edge_ratio(&self) -> f64 {
        let (lo, hi) = self.edge_extremes();
        hi / lo
    }

    /// Shoelace area; positive for counterclockwise curves. Open curves are
    /// closed implicitly by their chord.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.vertices[i].cross(self.vertices[(i + 1) % n]);
        }
        0.5 * acc
    }

    /// Rotation index of a closed curve: total turning of the tangent over 2π.
    pub fn turning_number(&self) -> i64 {
        if !self.closed {
            return 0;
        }
        let n = self.vertices.len();
        let mut total = 0.0;
        for i in 0..n {
            let (a, b) = self.edge(i);
            let (_, c) = self.edge((i + 1) % n);
            let t0 = b - a;
            let t1 = c - b;
            total += t0.cross(t1).atan2(t0.dot(t1));
        }
        (total / TAU).round() as i64
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len() as f64;
        let s = self.vertices.iter().fold(Vec2::ZERO, |acc, &p| acc + p);
        s / n
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounds(&self) -> (Vec2, Vec2) {
        bounds_of(&self.vertices)
    }

    /// Vertex `i` with its two neighbours, if it has both.
    #[inline]
    pub fn triple(&self, i: usize) -> Option<(Vec2, Vec2, Vec2)> {
        let n = self.vertices.len();
        if self.closed {
            Some((self.vertices[(i + n - 1) % n], self.vertices[i], self.vertices[(i + 1) % n]))
        } else if i == 0 || i + 1 >= n {
            None
        } else {
            Some((self.vertices[i - 1], self.vertices[i], self.vertices[i + 1]))
        }
    }

    /// Cumulative arclength at each vertex; for closed curves a trailing entry
    /// holds the total length.
    pub fn arclengths(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.vertices.len() + 1);
        s.push(0.0);
        let mut acc = 0.0;
        for i in 0..self.edge_count() {
            acc += self.edge_length(i);
            s.push(acc);
        }
        s
    }

    /// Distance from `p` to the nearest point of the curve.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        (0..self.edge_count())
            .map(|i| {
                let (a, b) = self.edge(i);
                point_segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn translated(&self, d: Vec2) -> Polyline {
        Polyline { vertices: self.vertices.iter().map(|&p| p + d).collect(), closed: self.closed }
    }

    pub fn reversed(&self) -> Polyline {
        let mut v = self.vertices.clone();
        v.reverse();
        Polyline { vertices: v, closed: self.closed }
    }
}

pub(crate) fn bounds_of(points: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let s = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * s)
}

/// Re-space the vertices at (approximately) uniform arclength `target_h` by
/// linear interpolation along the existing polygon. Vertex 0 is kept; open
/// curves also keep their last vertex.
pub fn resample(curve: &Polyline, target_h: f64) -> Result<Polyline> {
    if !(target_h > 0.0) {
        return Err(Error::InvalidPolyline("target_h must be positive".into()));
    }
    let total = curve.length();
    if total < 3.0 * target_h {
        return Err(Error::CurveTooShort);
    }
    let segments = ((total / target_h).round() as usize).max(if curve.closed { 3 } else { 2 });
    resample_count(curve, segments)
}

/// Resample to exactly `segments` equal-arclength edges.
pub fn resample_count(curve: &Polyline, segments: usize) -> Result<Polyline> {
    let s = curve.arclengths();
    let total = *s.last().unwrap();
    let step = total / segments as f64;
    let count = if curve.closed { segments } else { segments + 1 };
    let mut out = Vec::with_capacity(count);
    let mut edge = 0;
    for k in 0..count {
        if !curve.closed && k == segments {
            out.push(*curve.vertices.last().unwrap());
            break;
        }
        let target = k as f64 * step;
        while edge + 1 < curve.edge_count() && s[edge + 1] <= target {
            edge += 1;
        }
        let (a, b) = curve.edge(edge);
        let len = s[edge + 1] - s[edge];
        let frac = if len > 0.0 { (target - s[edge]) / len } else { 0.0 };
        out.push(a.lerp(b, frac.clamp(0.0, 1.0)));
    }
    Polyline::new(out, curve.closed)
}

/// Signed Menger curvature of the triple `(a, b, c)`: twice the sine of the
/// turning angle over the chord product. Positive for left turns; collinear
/// or degenerate triples give 0.
#[inline]
pub fn menger_curvature(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let denom = a.dist(b) * b.dist(c) * a.dist(c);
    if denom <= 0.0 {
        return 0.0;
    }
    2.0 * (b - a).cross(c - b) / denom
}

/// Per-vertex signed curvature; counterclockwise convex curves are positive.
/// Endpoints of open curves get 0.
pub fn curvature(curve: &Polyline) -> Vec<f64> {
    (0..curve.len())
        .map(|i| match curve.triple(i) {
            Some((a, b, c)) => menger_curvature(a, b, c),
            None => 0.0,
        })
        .collect()
}

/// Left unit normal at each vertex, taken perpendicular to the chord joining
/// its neighbours (the tangent of the Menger circle). Endpoints of open curves
/// use their single edge.
pub fn vertex_normals(curve: &Polyline) -> Vec<Vec2> {
    let v = curve.vertices();
    let n = v.len();
    (0..n)
        .map(|i| {
            let chord = match curve.triple(i) {
                Some((a, _, c)) => c - a,
                None if i == 0 => v[1] - v[0],
                None => v[n - 1] - v[n - 2],
            };
            chord.perp().normalized()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes;

    #[test]
    fn rejects_short_or_degenerate() {
        assert!(Polyline::closed(vec![Vec2::ZERO, Vec2::new(1.0, 0.0)]).is_err());
        let dup = vec![Vec2::ZERO, Vec2::ZERO, Vec2::new(1.0, 0.0)];
        assert!(Polyline::closed(dup).is_err());
        let nan = vec![Vec2::ZERO, Vec2::new(f64::NAN, 0.0), Vec2::new(1.0, 0.0)];
        assert!(Polyline::closed(nan).is_err());
    }

    #[test]
    fn resample_circle_doubles_vertices() {
        let c = shapes::circle(Vec2::ZERO, 1.0, 100);
        let r = resample(&c, TAU / 200.0).unwrap();
        assert_eq!(r.len(), 200);
        for p in r.vertices() {
            assert!((p.norm() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn resample_square_is_exact() {
        let sq =
            Polyline::closed(vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(2.0, 2.0), Vec2::new(0.0, 2.0)])
                .unwrap();
        let r = resample(&sq, 0.2).unwrap();
        assert_eq!(r.len(), 40);
        assert!((r.length() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn resample_too_short() {
        let c = shapes::circle(Vec2::ZERO, 0.01, 32);
        assert_eq!(resample(&c, 0.1), Err(Error::CurveTooShort));
    }

    #[test]
    fn resample_open_keeps_endpoints() {
        let line = Polyline::open(vec![Vec2::new(0.0, 0.0), Vec2::new(0.3, 0.1), Vec2::new(1.0, 0.0)]).unwrap();
        let r = resample(&line, 0.05).unwrap();
        assert_eq!(r.vertices()[0], Vec2::ZERO);
        assert_eq!(*r.vertices().last().unwrap(), Vec2::new(1.0, 0.0));
    }

    #[test]
    fn circle_curvature() {
        let c = shapes::circle(Vec2::new(3.0, -1.0), 2.0, 256);
        for k in curvature(&c) {
            assert!((k - 0.5).abs() < 1e-9, "{k}");
        }
        let cw = c.reversed();
        for k in curvature(&cw) {
            assert!((k + 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn straight_interior_curvature_vanishes() {
        let line = Polyline::open((0..10).map(|i| Vec2::new(i as f64, 2.0 * i as f64)).collect()).unwrap();
        for k in curvature(&line) {
            assert_eq!(k, 0.0);
        }
    }

    #[test]
    fn ellipse_vertex_curvature() {
        // kappa = a / b^2 at (a, 0)
        let e = shapes::ellipse(Vec2::ZERO, 2.0, 1.0, 2000);
        let k = curvature(&e);
        assert!((k[0] - 2.0).abs() < 1e-3, "{}", k[0]);
    }

    #[test]
    fn area_and_turning() {
        let c = shapes::circle(Vec2::ZERO, 1.0, 400);
        assert!((c.signed_area() - std::f64::consts::PI).abs() < 1e-3);
        assert_eq!(c.turning_number(), 1);
        assert_eq!(c.reversed().turning_number(), -1);
        assert_eq!(shapes::figure_eight(1.0, 400).turning_number(), 0);
        assert_eq!(shapes::trefoil(1.0, 600).turning_number().abs(), 2);
    }
}
