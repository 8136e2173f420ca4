use std::collections::HashMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::polyline::bounds_of;
use super::Vec2;
use crate::error::{Error, Result};

/// How the coordinates of a [`PointCloud`] are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudMode {
    /// Points in the plane.
    Planar,
    /// Meridian points `(r, z)`; each stands for a round `(n-1)`-sphere of
    /// radius `r` in the hyperplane at height `z`.
    Axisymmetric,
}

/// Unordered set of intersection points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec2>,
    ambient_n: usize,
    mode: CloudMode,
}

impl PointCloud {
    pub fn planar(points: Vec<Vec2>, ambient_n: usize) -> Self {
        PointCloud { points, ambient_n, mode: CloudMode::Planar }
    }

    /// Meridian points for an `n`-dimensional rotationally symmetric flow.
    pub fn axisymmetric(points: Vec<Vec2>, n: usize) -> Self {
        PointCloud { points, ambient_n: n, mode: CloudMode::Axisymmetric }
    }

    pub fn empty(ambient_n: usize) -> Self {
        Self::planar(Vec::new(), ambient_n)
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    pub fn mode(&self) -> CloudMode {
        self.mode
    }

    pub fn union(&self, other: &PointCloud) -> PointCloud {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        PointCloud { points, ambient_n: self.ambient_n, mode: self.mode }
    }

    /// Planar samples of the set this cloud represents: the points
    /// themselves, or for axisymmetric clouds with `n = 2` the circles of
    /// revolution (radii below `min_r` collapse to a point on the axis).
    pub fn reconstruct_planar(&self, min_r: f64, per_circle: usize) -> Vec<Vec2> {
        match self.mode {
            CloudMode::Planar => self.points.clone(),
            CloudMode::Axisymmetric => {
                let mut out = Vec::new();
                for p in &self.points {
                    if p.x < min_r {
                        out.push(Vec2::ZERO);
                    } else {
                        out.extend((0..per_circle).map(|i| Vec2::from_polar(p.x, TAU * i as f64 / per_circle as f64)));
                    }
                }
                out
            }
        }
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n], sets: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

/// All index pairs `(i, j)`, `i < j`, with `|p_i - p_j| <= r`, found via a
/// uniform grid of cell size `r`.
pub fn pairs_within(points: &[Vec2], r: f64) -> Vec<(usize, usize, f64)> {
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: Vec2| ((p.x / r).floor() as i64, (p.y / r).floor() as i64);
    for (i, &p) in points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let mut out = Vec::new();
    for (i, &p) in points.iter().enumerate() {
        let (cx, cy) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in bucket {
                        if j > i {
                            let d = p.dist(points[j]);
                            if d <= r {
                                out.push((i, j, d));
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by_key(|a| (a.0, a.1));
    out
}

/// Connected components of the graph linking points at distance `<= link_r`.
pub fn count_components(cloud: &PointCloud, link_r: f64) -> usize {
    components_of(cloud.points(), link_r)
}

pub fn components_of(points: &[Vec2], link_r: f64) -> usize {
    if points.is_empty() {
        return 0;
    }
    let mut uf = UnionFind::new(points.len());
    for (i, j, _) in pairs_within(points, link_r) {
        uf.union(i, j);
    }
    uf.sets()
}

/// Dyadic box sizes `D/2, D/4, ...` where `D` is the larger side of the
/// cloud's bounding box (1 for a degenerate box).
pub fn dyadic_scales(points: &[Vec2], count: usize) -> Vec<f64> {
    let extent = if points.is_empty() {
        1.0
    } else {
        let (lo, hi) = bounds_of(points);
        let d = (hi.x - lo.x).max(hi.y - lo.y);
        if d > 0.0 {
            d
        } else {
            1.0
        }
    };
    (1..=count).map(|k| extent / (1u64 << k) as f64).collect()
}

/// Box-counting dimension: least-squares slope of `ln N(ε)` against
/// `ln(1/ε)`, boxes anchored at the bounding-box corner. `None` for an empty
/// cloud.
pub fn box_dimension(cloud: &PointCloud, scales: &[f64]) -> Result<Option<f64>> {
    box_dimension_of(cloud.points(), scales)
}

pub fn box_dimension_of(points: &[Vec2], scales: &[f64]) -> Result<Option<f64>> {
    if scales.len() < 4 || scales.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InsufficientScales);
    }
    let lo_s = scales.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_s = scales.iter().cloned().fold(0.0, f64::max);
    if hi_s / lo_s < 8.0 - 1e-12 {
        return Err(Error::InsufficientScales);
    }
    if points.is_empty() {
        return Ok(None);
    }
    let (lo, hi) = bounds_of(points);
    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    let mut occupied = std::collections::HashSet::new();
    for &eps in scales {
        let nx = (((hi.x - lo.x) / eps).ceil() as i64).max(1);
        let ny = (((hi.y - lo.y) / eps).ceil() as i64).max(1);
        occupied.clear();
        for p in points {
            let i = (((p.x - lo.x) / eps).floor() as i64).min(nx - 1);
            let j = (((p.y - lo.y) / eps).floor() as i64).min(ny - 1);
            occupied.insert((i, j));
        }
        xs.push((1.0 / eps).ln());
        ys.push((occupied.len() as f64).ln());
    }
    Ok(Some(least_squares_slope(&xs, &ys)))
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Area of the unit `k`-sphere in `R^{k+1}`.
pub fn unit_sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => TAU,
        _ => TAU / (k as f64 - 1.0) * unit_sphere_area(k - 2),
    }
}

/// `(n-1)`-dimensional measure estimate of an intersection set.
///
/// Planar clouds with `ambient_n = 1` are finite sets, measured by counting
/// clusters at scale `cover_r`. Planar clouds with `ambient_n >= 2` are
/// sampled curves, measured by the length of their minimum spanning forest
/// restricted to links of length `<= cover_r`. Axisymmetric clouds sum the
/// sphere areas `C_{n-1} r^{n-1}`.
pub fn measure_estimate(cloud: &PointCloud, ambient_n: usize, cover_r: f64) -> Result<f64> {
    if cloud.is_empty() {
        return Ok(0.0);
    }
    match cloud.mode() {
        CloudMode::Axisymmetric => {
            if cloud.points().iter().any(|p| p.x < 0.0) {
                return Err(Error::InvalidRadius);
            }
            let k = ambient_n.saturating_sub(1);
            let c = unit_sphere_area(k);
            Ok(cloud.points().iter().map(|p| c * p.x.powi(k as i32)).sum())
        }
        CloudMode::Planar if ambient_n <= 1 => Ok(count_components(cloud, cover_r) as f64),
        CloudMode::Planar => Ok(spanning_forest_length(cloud.points(), cover_r)),
    }
}

/// Total length of the minimum spanning forest using links `<= link_r`.
pub fn spanning_forest_length(points: &[Vec2], link_r: f64) -> f64 {
    let mut edges = pairs_within(points, link_r);
    edges.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut uf = UnionFind::new(points.len());
    edges.into_iter().filter(|&(i, j, _)| uf.union(i, j)).map(|e| e.2).sum()
}

/// Discrete Hausdorff distance between two point sets (∞ if exactly one is
/// empty, 0 if both are).
pub fn hausdorff_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => directed_hausdorff(a, b).max(directed_hausdorff(b, a)),
    }
}

/// Bucket grid over a point set for nearest-distance queries.
pub struct NearestGrid<'a> {
    points: &'a [Vec2],
    lo: Vec2,
    cell: f64,
    max_ring: i64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> NearestGrid<'a> {
    /// Grid over `points`; `span` is any box containing both the points and
    /// the later query points.
    pub fn new(points: &'a [Vec2], span: (Vec2, Vec2)) -> Self {
        let (lo, hi) = span;
        let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1e-300);
        let cell = extent / (points.len() as f64).sqrt().max(1.0);
        let mut g =
            NearestGrid { points, lo, cell, max_ring: (extent / cell).ceil() as i64 + 1, buckets: HashMap::new() };
        for (i, &q) in points.iter().enumerate() {
            let k = g.key(q);
            g.buckets.entry(k).or_default().push(i);
        }
        g
    }

    fn key(&self, p: Vec2) -> (i64, i64) {
        (((p.x - self.lo.x) / self.cell).floor() as i64, ((p.y - self.lo.y) / self.cell).floor() as i64)
    }

    /// Distance from `p` to the nearest point (∞ when empty).
    pub fn nearest(&self, p: Vec2) -> f64 {
        let (cx, cy) = self.key(p);
        let mut best = f64::INFINITY;
        for ring in 0..=self.max_ring {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    if let Some(bucket) = self.buckets.get(&(cx + dx, cy + dy)) {
                        for &j in bucket {
                            best = best.min(p.dist(self.points[j]));
                        }
                    }
                }
            }
            // unsearched cells are at least `ring * cell` away
            if best <= ring as f64 * self.cell {
                break;
            }
        }
        best
    }
}

fn joint_bounds(a: &[Vec2], b: &[Vec2]) -> (Vec2, Vec2) {
    let (la, ha) = bounds_of(a);
    let (lb, hb) = bounds_of(b);
    (Vec2::new(la.x.min(lb.x), la.y.min(lb.y)), Vec2::new(ha.x.max(hb.x), ha.y.max(hb.y)))
}

/// `max_{p in a} min_{q in b} |p - q|`, using a grid over `b`.
pub fn directed_hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if b.is_empty() {
        return f64::INFINITY;
    }
    let grid = NearestGrid::new(b, joint_bounds(a, b));
    a.iter().map(|&p| grid.nearest(p)).fold(0.0, f64::max)
}

/// Smallest distance between two point sets (∞ if either is empty).
pub fn set_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let grid = NearestGrid::new(b, joint_bounds(a, b));
    a.iter().map(|&p| grid.nearest(p)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn components_basic() {
        let c = PointCloud::planar(vec![Vec2::ZERO, Vec2::new(0.1, 0.0)], 1);
        assert_eq!(count_components(&c, 0.2), 1);
        let c = PointCloud::planar(vec![Vec2::ZERO, Vec2::new(5.0, 0.0)], 1);
        assert_eq!(count_components(&c, 0.2), 2);
        assert_eq!(count_components(&PointCloud::empty(1), 0.2), 0);
    }

    #[test]
    fn components_two_circles_match_brute_force() {
        let mut pts = Vec::new();
        for k in 0..50 {
            let a = TAU * k as f64 / 50.0;
            pts.push(Vec2::from_polar(1.0, a));
            pts.push(Vec2::new(10.0, 0.0) + Vec2::from_polar(1.0, a));
        }
        // brute-force oracle
        let mut uf = UnionFind::new(pts.len());
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if pts[i].dist(pts[j]) <= 0.3 {
                    uf.union(i, j);
                }
            }
        }
        assert_eq!(uf.sets(), 2);
        assert_eq!(count_components(&PointCloud::planar(pts, 1), 0.3), 2);
    }

    #[test]
    fn box_dimension_segment_and_point() {
        let seg: Vec<Vec2> = (0..10_000).map(|i| Vec2::new(i as f64 / 9999.0, 0.0)).collect();
        let d = box_dimension_of(&seg, &dyadic_scales(&seg, 6)).unwrap().unwrap();
        assert!((d - 1.0).abs() < 0.1, "{d}");
        let pt = [Vec2::new(0.3, 0.2)];
        let d = box_dimension_of(&pt, &dyadic_scales(&pt, 6)).unwrap().unwrap();
        assert!(d.abs() < 0.05);
        assert_eq!(box_dimension_of(&[], &dyadic_scales(&[], 6)).unwrap(), None);
    }

    #[test]
    fn box_dimension_cantor() {
        // exact middle-thirds construction to depth 10, sampled at interval
        // left endpoints and spread to 10k points
        let mut intervals = vec![(0.0f64, 1.0f64)];
        for _ in 0..10 {
            intervals = intervals
                .into_iter()
                .flat_map(|(a, b)| {
                    let w = (b - a) / 3.0;
                    [(a, a + w), (b - w, b)]
                })
                .collect();
        }
        let per = 10_000 / intervals.len() + 1;
        let pts: Vec<Vec2> = intervals
            .iter()
            .flat_map(|&(a, b)| (0..per).map(move |k| Vec2::new(a + (b - a) * k as f64 / per as f64, 0.0)))
            .take(10_000)
            .collect();
        let d = box_dimension_of(&pts, &dyadic_scales(&pts, 8)).unwrap().unwrap();
        let expect = 2f64.ln() / 3f64.ln();
        assert!((d - expect).abs() < 0.08, "{d} vs {expect}");
    }

    #[test]
    fn box_dimension_needs_scales() {
        let pts = [Vec2::ZERO];
        assert_eq!(box_dimension_of(&pts, &[0.5, 0.25, 0.125]), Err(Error::InsufficientScales));
        assert_eq!(box_dimension_of(&pts, &[0.5, 0.4, 0.3, 0.2]), Err(Error::InsufficientScales));
    }

    #[test]
    fn sphere_areas() {
        assert_eq!(unit_sphere_area(0), 2.0);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn axisymmetric_measure() {
        let c = PointCloud::axisymmetric(vec![Vec2::new(20.0, 0.0), Vec2::new(21.0, 0.0)], 2);
        let m = measure_estimate(&c, 2, 0.1).unwrap();
        assert!((m - 82.0 * PI).abs() < 1e-9);
        let bad = PointCloud::axisymmetric(vec![Vec2::new(-1.0, 0.0)], 2);
        assert_eq!(measure_estimate(&bad, 2, 0.1), Err(Error::InvalidRadius));
        assert_eq!(measure_estimate(&PointCloud::empty(2), 2, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn chained_circle_length() {
        let pts: Vec<Vec2> = (0..1000).map(|i| Vec2::from_polar(1.0, TAU * i as f64 / 1000.0)).collect();
        let m = measure_estimate(&PointCloud::planar(pts, 2), 2, 0.02).unwrap();
        assert!((m - TAU).abs() < 0.01 * TAU, "{m}");
    }

    #[test]
    fn hausdorff_simple() {
        let a = [Vec2::ZERO, Vec2::new(1.0, 0.0)];
        let b = [Vec2::new(0.0, 0.5)];
        let d = hausdorff_distance(&a, &b);
        assert!((d - 1.25f64.sqrt()).abs() < 1e-12);
        assert!((set_distance(&a, &b) - 0.5).abs() < 1e-12);
    }
}
