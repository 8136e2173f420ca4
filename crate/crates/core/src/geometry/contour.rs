//! Marching squares with linear subcell interpolation.

use std::collections::BTreeMap;

use super::{Polyline, ScalarField2D, Vec2};

/// Node values equal to the level are nudged up by this amount so every
/// crossing lies strictly inside a grid edge.
pub const TIE_BREAK: f64 = 1e-12;

/// One connected piece of a level set.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

impl Contour {
    pub fn length(&self) -> f64 {
        let open: f64 = self.points.windows(2).map(|w| w[0].dist(w[1])).sum();
        if self.closed && self.points.len() > 1 {
            open + self.points[self.points.len() - 1].dist(self.points[0])
        } else {
            open
        }
    }

    /// The contour as a polyline, dropping near-duplicate points; `None` when
    /// fewer than three distinct points remain.
    pub fn to_polyline(&self) -> Option<Polyline> {
        let mut pts: Vec<Vec2> = Vec::with_capacity(self.points.len());
        for &p in &self.points {
            if pts.last().is_none_or(|q: &Vec2| q.dist(p) > 1e-12) {
                pts.push(p);
            }
        }
        if self.closed && pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) <= 1e-12 {
            pts.pop();
        }
        Polyline::new(pts, self.closed).ok()
    }
}

fn shifted(v: f64, level: f64) -> f64 {
    let d = v - level;
    if d == 0.0 {
        TIE_BREAK
    } else {
        d
    }
}

fn crossing(pa: Vec2, pb: Vec2, a: f64, b: f64) -> Vec2 {
    let t = a / (a - b);
    pa.lerp(pb, t)
}

/// Crossings of a line field with `level`, as x coordinates.
pub fn line_crossings(field: &ScalarField2D, level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..field.nx() - 1 {
        let a = shifted(field.get(i, 0), level);
        let b = shifted(field.get(i + 1, 0), level);
        if (a < 0.0) != (b < 0.0) {
            out.push(crossing(field.pos(i, 0), field.pos(i + 1, 0), a, b).x);
        }
    }
    out
}

/// Level set `{field = level}` of a two-dimensional field, as chained
/// contours. Open contours end on the domain boundary.
///
/// Saddle cells are resolved by the sign of the cell-centre average.
pub fn contours(field: &ScalarField2D, level: f64) -> Vec<Contour> {
    let (nx, ny) = (field.nx(), field.ny());
    if ny < 2 {
        return Vec::new();
    }
    let val = |i: usize, j: usize| shifted(field.get(i, j), level);
    // edge ids: horizontal (i,j)-(i+1,j) -> 2k, vertical (i,j)-(i,j+1) -> 2k+1
    let hid = |i: usize, j: usize| 2 * (j * nx + i);
    let vid = |i: usize, j: usize| 2 * (j * nx + i) + 1;
    let mut points: BTreeMap<usize, Vec2> = BTreeMap::new();
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut link = |a: usize, b: usize| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)];
            let neg = c.map(|v| v < 0.0);
            let mask = neg.iter().enumerate().fold(0u8, |m, (k, &n)| m | ((n as u8) << k));
            if mask == 0 || mask == 15 {
                continue;
            }
            let p = [field.pos(i, j), field.pos(i + 1, j), field.pos(i + 1, j + 1), field.pos(i, j + 1)];
            // cell edges: bottom, right, top, left with their corner pairs
            let edges = [(hid(i, j), 0, 1), (vid(i + 1, j), 1, 2), (hid(i, j + 1), 3, 2), (vid(i, j), 0, 3)];
            let mut crossed = Vec::with_capacity(4);
            for (k, &(id, a, b)) in edges.iter().enumerate() {
                if neg[a] != neg[b] {
                    points.entry(id).or_insert_with(|| crossing(p[a], p[b], c[a], c[b]));
                    crossed.push(k);
                }
            }
            if crossed.len() == 2 {
                link(edges[crossed[0]].0, edges[crossed[1]].0);
            } else {
                let centre = 0.25 * (c[0] + c[1] + c[2] + c[3]);
                if (centre < 0.0) == neg[0] {
                    // corners 0 and 2 joined through the centre
                    link(edges[0].0, edges[1].0);
                    link(edges[2].0, edges[3].0);
                } else {
                    link(edges[3].0, edges[0].0);
                    link(edges[1].0, edges[2].0);
                }
            }
        }
    }
    chain(&points, &adj)
}

fn chain(points: &BTreeMap<usize, Vec2>, adj: &BTreeMap<usize, Vec<usize>>) -> Vec<Contour> {
    let mut used = std::collections::HashSet::new();
    let mut out = Vec::new();
    let walk = |start: usize, used: &mut std::collections::HashSet<usize>| {
        let mut ids = vec![start];
        used.insert(start);
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().copied().find(|n| !used.contains(n));
            match next {
                Some(n) => {
                    used.insert(n);
                    ids.push(n);
                    cur = n;
                }
                None => break,
            }
        }
        ids
    };
    // open chains start at degree-one edges (domain boundary)
    for (&id, nbrs) in adj {
        if nbrs.len() == 1 && !used.contains(&id) {
            let ids = walk(id, &mut used);
            out.push(Contour { points: ids.iter().map(|k| points[k]).collect(), closed: false });
        }
    }
    for &id in adj.keys() {
        if !used.contains(&id) {
            let ids = walk(id, &mut used);
            out.push(Contour { points: ids.iter().map(|k| points[k]).collect(), closed: true });
        }
    }
    out
}

/// All crossing points of the level set, without chaining.
pub fn level_points(field: &ScalarField2D, level: f64) -> Vec<Vec2> {
    if field.ny() == 1 {
        return line_crossings(field, level).into_iter().map(|x| Vec2::new(x, field.origin().y)).collect();
    }
    contours(field, level).into_iter().flat_map(|c| c.points).collect()
}

/// Total length of the level set (point count for line fields).
pub fn level_measure(field: &ScalarField2D, level: f64) -> f64 {
    if field.ny() == 1 {
        return line_crossings(field, level).len() as f64;
    }
    contours(field, level).iter().map(Contour::length).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid(n: usize, f: impl Fn(Vec2) -> f64) -> ScalarField2D {
        let h = 2.0 / (n - 1) as f64;
        ScalarField2D::from_fn(n, n, h, Vec2::new(-1.0, -1.0), f).unwrap()
    }

    #[test]
    fn circle_contour_is_closed_with_right_length() {
        let f = grid(101, |p| p.norm() - 0.5);
        let cs = contours(&f, 0.0);
        assert_eq!(cs.len(), 1);
        assert!(cs[0].closed);
        assert!((cs[0].length() - TAU * 0.5).abs() < 0.01);
        for p in &cs[0].points {
            assert!((p.norm() - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn line_contour_is_open() {
        let f = grid(41, |p| p.x - 0.013);
        let cs = contours(&f, 0.0);
        assert_eq!(cs.len(), 1);
        assert!(!cs[0].closed);
        assert!((cs[0].length() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn exact_zero_values_are_tie_broken() {
        let f = grid(21, |p| p.x);
        let cs = contours(&f, 0.0);
        assert_eq!(cs.len(), 1);
        assert!((cs[0].length() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn two_blobs_give_two_loops() {
        let f = grid(81, |p| (p + Vec2::new(0.5, 0.0)).norm().min((p - Vec2::new(0.5, 0.0)).norm()) - 0.3);
        let cs = contours(&f, 0.0);
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.closed));
    }

    #[test]
    fn saddle_is_consistent() {
        // x*y has a saddle at the origin; with a cell centred there the two
        // crossing lines separate into two open arcs
        let f = ScalarField2D::from_fn(10, 10, 0.2, Vec2::new(-0.9, -0.9), |p| p.x * p.y + 0.01).unwrap();
        let cs = contours(&f, 0.0);
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| !c.closed));
    }

    #[test]
    fn line_field_crossings() {
        let f = ScalarField2D::line(201, 0.01, -1.0, |x| x * x - 0.25).unwrap();
        let xs = line_crossings(&f, 0.0);
        assert_eq!(xs.len(), 2);
        assert!((xs[0] + 0.5).abs() < 1e-3 && (xs[1] - 0.5).abs() < 1e-3);
    }
}
