//! Segment-segment crossings between polylines, with a uniform-grid broad
//! phase and tangential near-miss detection.

use std::collections::HashMap;

use super::polyline::point_segment_distance;
use super::{PointCloud, Polyline, Vec2};

/// Sampling scale of a curve: its mean edge length.
pub fn sampling_scale(curve: &Polyline) -> f64 {
    curve.mean_edge()
}

struct EdgeGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl EdgeGrid {
    fn build(curve: &Polyline, cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for i in 0..curve.edge_count() {
            let (a, b) = curve.edge(i);
            for key in cells_overlapping(a, b, cell, 0.0) {
                buckets.entry(key).or_default().push(i);
            }
        }
        EdgeGrid { cell, buckets }
    }

    /// Candidate edges near the segment `a`-`b` inflated by `pad`, sorted and
    /// unique.
    fn candidates(&self, a: Vec2, b: Vec2, pad: f64) -> Vec<usize> {
        let mut out = Vec::new();
        for key in cells_overlapping(a, b, self.cell, pad) {
            if let Some(v) = self.buckets.get(&key) {
                out.extend_from_slice(v);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn cells_overlapping(a: Vec2, b: Vec2, cell: f64, pad: f64) -> impl Iterator<Item = (i64, i64)> {
    let x0 = ((a.x.min(b.x) - pad) / cell).floor() as i64;
    let x1 = ((a.x.max(b.x) + pad) / cell).floor() as i64;
    let y0 = ((a.y.min(b.y) - pad) / cell).floor() as i64;
    let y1 = ((a.y.max(b.y) + pad) / cell).floor() as i64;
    (x0..=x1).flat_map(move |i| (y0..=y1).map(move |j| (i, j)))
}

fn seg_key(a: Vec2, b: Vec2) -> (Vec2, Vec2) {
    if (a.x, a.y) <= (b.x, b.y) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Transverse crossing point of two closed segments, if any. The result does
/// not depend on the argument order.
pub fn segment_crossing(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> Option<Vec2> {
    let (p0, p1) = seg_key(p0, p1);
    let (q0, q1) = seg_key(q0, q1);
    // canonical order so swapping the segments is bitwise symmetric
    let ((p0, p1), (q0, q1)) =
        if (p0.x, p0.y, p1.x, p1.y) <= (q0.x, q0.y, q1.x, q1.y) { ((p0, p1), (q0, q1)) } else { ((q0, q1), (p0, p1)) };
    let r = p1 - p0;
    let d = q1 - q0;
    let denom = r.cross(d);
    if denom == 0.0 {
        return None;
    }
    let w = q0 - p0;
    let s = w.cross(d) / denom;
    let u = w.cross(r) / denom;
    if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&u) {
        Some(p0 + r * s)
    } else {
        None
    }
}

/// Merge points closer than `radius` (greedy in lexicographic order); the
/// output is sorted.
pub fn dedup_points(mut pts: Vec<Vec2>, radius: f64) -> Vec<Vec2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut reps: Vec<Vec2> = Vec::new();
    for p in pts {
        if !reps.iter().any(|q| q.dist(p) <= radius) {
            reps.push(p);
        }
    }
    reps
}

/// Raw crossings as `(edge of a, edge of b, point)`.
fn raw_crossings(a: &Polyline, b: &Polyline) -> Vec<(usize, usize, Vec2)> {
    let cell = a.max_edge().max(b.max_edge());
    let grid = EdgeGrid::build(b, cell);
    let mut out = Vec::new();
    for i in 0..a.edge_count() {
        let (p0, p1) = a.edge(i);
        for j in grid.candidates(p0, p1, 0.0) {
            let (q0, q1) = b.edge(j);
            if let Some(x) = segment_crossing(p0, p1, q0, q1) {
                out.push((i, j, x));
            }
        }
    }
    out
}

/// Runs of consecutive vertices of `a` lying within `tol` of `b` that do not
/// touch a crossing edge; each yields one tangential contact point (midpoint
/// of the closest vertex and its projection).
fn tangential_contacts(a: &Polyline, b: &Polyline, crossing_edges: &[usize], tol: f64) -> Vec<Vec2> {
    let cell = a.max_edge().max(b.max_edge()).max(tol);
    let grid = EdgeGrid::build(b, cell);
    let n = a.len();
    let near: Vec<Option<(f64, Vec2)>> = a
        .vertices()
        .iter()
        .map(|&p| {
            let mut best: Option<(f64, Vec2)> = None;
            for j in grid.candidates(p, p, tol) {
                let (q0, q1) = b.edge(j);
                let d = point_segment_distance(p, q0, q1);
                if d < tol && best.is_none_or(|(bd, _)| d < bd) {
                    let ab = q1 - q0;
                    let s = ((p - q0).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
                    best = Some((d, q0 + ab * s));
                }
            }
            best
        })
        .collect();

    let crosses = |e: usize| crossing_edges.binary_search(&e).is_ok();
    let mut out = Vec::new();
    let mut visited = vec![false; n];
    for start in 0..n {
        if visited[start] || near[start].is_none() {
            continue;
        }
        // walk back to the beginning of the run on closed curves
        let mut s = start;
        if a.is_closed() {
            let mut steps = 0;
            while near[(s + n - 1) % n].is_some() && steps < n {
                s = (s + n - 1) % n;
                steps += 1;
            }
        }
        let mut run = Vec::new();
        let mut i = s;
        while near[i].is_some() && !visited[i] {
            visited[i] = true;
            run.push(i);
            if !a.is_closed() && i + 1 == n {
                break;
            }
            i = (i + 1) % n;
        }
        if run.is_empty() {
            continue;
        }
        let first = run[0];
        let mut touches = false;
        let before = if a.is_closed() { Some((first + n - 1) % n) } else { first.checked_sub(1) };
        if let Some(e) = before {
            touches |= crosses(e);
        }
        for &v in &run {
            if v < a.edge_count() {
                touches |= crosses(v);
            }
        }
        if touches {
            continue;
        }
        let (v, (_, foot)) =
            run.iter().map(|&v| (v, near[v].unwrap())).min_by(|x, y| x.1 .0.total_cmp(&y.1 .0)).unwrap();
        out.push(a.vertices()[v].midpoint(foot));
    }
    out
}

/// Intersection points of two curves.
///
/// Transverse crossings are exact segment intersections; places where the
/// curves come within `h/2` of each other without crossing count as one
/// tangential point each. Points closer than `h/4` are merged, where `h` is
/// the finer of the two sampling scales.
pub fn polyline_intersections(a: &Polyline, b: &Polyline) -> PointCloud {
    let h = sampling_scale(a).min(sampling_scale(b));
    polyline_intersections_with(a, b, h / 4.0, h / 2.0)
}

pub fn polyline_intersections_with(a: &Polyline, b: &Polyline, dedup_r: f64, tol_touch: f64) -> PointCloud {
    let raw = raw_crossings(a, b);
    let mut edges_a: Vec<usize> = raw.iter().map(|c| c.0).collect();
    let mut edges_b: Vec<usize> = raw.iter().map(|c| c.1).collect();
    edges_a.sort_unstable();
    edges_a.dedup();
    edges_b.sort_unstable();
    edges_b.dedup();
    let mut pts: Vec<Vec2> = raw.iter().map(|c| c.2).collect();

    let from_a = tangential_contacts(a, b, &edges_a, tol_touch);
    let from_b = tangential_contacts(b, a, &edges_b, tol_touch);
    pts.extend(merge_contacts(from_a, from_b, 4.0 * tol_touch));
    PointCloud::planar(dedup_points(pts, dedup_r), 1)
}

/// Pair contact candidates found from each side and average matched pairs;
/// the averaging is commutative so the result is symmetric in the inputs.
fn merge_contacts(mut a: Vec<Vec2>, mut b: Vec<Vec2>, radius: f64) -> Vec<Vec2> {
    let key = |p: &Vec2, q: &Vec2| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y));
    a.sort_by(key);
    b.sort_by(key);
    let mut used = vec![false; b.len()];
    let mut out = Vec::new();
    for p in a {
        let best = b
            .iter()
            .enumerate()
            .filter(|(j, q)| !used[*j] && q.dist(p) <= radius)
            .min_by(|x, y| x.1.dist(p).total_cmp(&y.1.dist(p)))
            .map(|(j, _)| j);
        match best {
            Some(j) => {
                used[j] = true;
                out.push(p.midpoint(b[j]));
            }
            None => out.push(p),
        }
    }
    out.extend(b.into_iter().zip(used).filter(|(_, u)| !u).map(|(q, _)| q));
    out
}

/// Transverse crossings between non-adjacent edges of one curve, merged
/// within a quarter of its sampling scale.
pub fn self_intersections(curve: &Polyline) -> PointCloud {
    let h = sampling_scale(curve);
    let m = curve.edge_count();
    let grid = EdgeGrid::build(curve, curve.max_edge());
    let mut pts = Vec::new();
    for i in 0..m {
        let (p0, p1) = curve.edge(i);
        for j in grid.candidates(p0, p1, 0.0) {
            if j <= i + 1 {
                continue;
            }
            if curve.is_closed() && i == 0 && j == m - 1 {
                continue;
            }
            let (q0, q1) = curve.edge(j);
            if let Some(x) = segment_crossing(p0, p1, q0, q1) {
                pts.push(x);
            }
        }
    }
    PointCloud::planar(dedup_points(pts, h / 4.0), 1)
}

/// Smallest vertex-to-curve distance between two curves.
pub fn min_distance(a: &Polyline, b: &Polyline) -> f64 {
    let va = a.vertices().iter().map(|&p| b.distance_to(p)).fold(f64::INFINITY, f64::min);
    let vb = b.vertices().iter().map(|&p| a.distance_to(p)).fold(f64::INFINITY, f64::min);
    va.min(vb)
}
