use serde::{Deserialize, Serialize};

use super::cloud::{box_dimension_of, components_of, dyadic_scales, measure_estimate, CloudMode};
use super::{PointCloud, Vec2};
use crate::error::Result;

/// Resolution knobs for turning a point cloud into an [`IntersectionSample`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleScales {
    /// Linking radius for component counting.
    pub link_r: f64,
    /// Covering radius for the measure estimate.
    pub cover_r: f64,
    /// Number of dyadic box-counting scales.
    pub box_scales: usize,
    /// Axisymmetric radii below this are treated as points on the axis.
    pub axis_r: f64,
}

impl SampleScales {
    /// Defaults tied to a sampling resolution `h`.
    pub fn for_resolution(h: f64) -> Self {
        SampleScales { link_r: 2.0 * h, cover_r: 2.0 * h, box_scales: 6, axis_r: h }
    }
}

/// Time-stamped snapshot of an intersection set.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionSample {
    pub t: f64,
    pub points: PointCloud,
    pub components: usize,
    pub measure_est: f64,
    pub dim_est: Option<f64>,
}

impl IntersectionSample {
    pub fn empty(t: f64, ambient_n: usize) -> Self {
        IntersectionSample { t, points: PointCloud::empty(ambient_n), components: 0, measure_est: 0.0, dim_est: None }
    }

    /// Estimates components, measure and dimension of `points`.
    ///
    /// Axisymmetric clouds are counted in the meridian: each radius is one
    /// sphere, and spheres whose meridian points link are one component.
    /// Their dimension is `(n-1)` times the box dimension of the reconstructed
    /// circles, or 0 when every radius sits on the axis.
    pub fn from_cloud(t: f64, points: PointCloud, scales: &SampleScales) -> Result<Self> {
        if points.is_empty() {
            return Ok(Self::empty(t, points.ambient_n()));
        }
        let n = points.ambient_n();
        let components = components_of(points.points(), scales.link_r);
        let (measure_est, dim_est) = match points.mode() {
            CloudMode::Planar => {
                let m = measure_estimate(&points, n, scales.cover_r)?;
                let pts = points.points();
                let d = box_dimension_of(pts, &dyadic_scales(pts, scales.box_scales))?;
                (m, d)
            }
            CloudMode::Axisymmetric => {
                let on_axis: Vec<Vec2> = points
                    .points()
                    .iter()
                    .map(|p| if p.x < scales.axis_r { Vec2::new(0.0, p.y) } else { *p })
                    .collect();
                let snapped = PointCloud::axisymmetric(on_axis, n);
                let m = measure_estimate(&snapped, n, scales.cover_r)?;
                let circles = snapped.reconstruct_planar(scales.axis_r, 1024);
                let d = box_dimension_of(&circles, &dyadic_scales(&circles, scales.box_scales))?;
                (m, d.map(|d| d * (n.max(2) - 1) as f64))
            }
        };
        Ok(IntersectionSample { t, points, components, measure_est, dim_est })
    }

    pub const CSV_HEADER: &'static str = "t,components,measure,dim,points";

    /// `t,components,measure,dim,x1,y1,x2,y2,...`; an undefined dimension is
    /// an empty field.
    pub fn csv_row(&self) -> String {
        let mut s = format!(
            "{},{},{},{}",
            self.t,
            self.components,
            self.measure_est,
            self.dim_est.map(|d| d.to_string()).unwrap_or_default()
        );
        for p in self.points.points() {
            s.push_str(&format!(",{},{}", p.x, p.y));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SampleJson::from(self)).expect("sample serializes")
    }
}

/// JSON form of an [`IntersectionSample`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleJson {
    pub t: f64,
    pub components: usize,
    pub measure: f64,
    pub dim: Option<f64>,
    pub points: Vec<[f64; 2]>,
}

impl From<&IntersectionSample> for SampleJson {
    fn from(s: &IntersectionSample) -> Self {
        SampleJson {
            t: s.t,
            components: s.components,
            measure: s.measure_est,
            dim: s.dim_est,
            points: s.points.points().iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

impl Serialize for IntersectionSample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SampleJson::from(self).serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sample_invariants() {
        let s = IntersectionSample::from_cloud(0.5, PointCloud::empty(1), &SampleScales::for_resolution(0.1)).unwrap();
        assert_eq!(s.components, 0);
        assert_eq!(s.measure_est, 0.0);
        assert_eq!(s.dim_est, None);
        assert_eq!(s.csv_row(), "0.5,0,0,");
    }

    #[test]
    fn two_points_csv_and_json() {
        let cloud = PointCloud::planar(vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)], 1);
        let s = IntersectionSample::from_cloud(0.0, cloud, &SampleScales::for_resolution(0.01)).unwrap();
        assert_eq!(s.components, 2);
        assert_eq!(s.measure_est, 2.0);
        assert!(s.dim_est.unwrap().abs() < 1e-9);
        assert_eq!(s.csv_row(), "0,2,2,0,-1,0,1,0");
        let j = s.to_json();
        assert_eq!(j["components"], 2);
        assert_eq!(j["points"][1][0], 1.0);
    }

    #[test]
    fn axis_point_has_zero_measure_and_dimension() {
        let cloud = PointCloud::axisymmetric(vec![Vec2::new(1e-4, 0.0)], 2);
        let s = IntersectionSample::from_cloud(0.0, cloud, &SampleScales::for_resolution(0.01)).unwrap();
        assert_eq!(s.components, 1);
        assert_eq!(s.measure_est, 0.0);
        assert!(s.dim_est.unwrap().abs() < 0.05);
    }

    #[test]
    fn axis_circle_has_dimension_one() {
        let cloud = PointCloud::axisymmetric(vec![Vec2::new(0.3, 0.0)], 2);
        let s = IntersectionSample::from_cloud(0.1, cloud, &SampleScales::for_resolution(0.01)).unwrap();
        assert!((s.measure_est - std::f64::consts::TAU * 0.3).abs() < 1e-12);
        assert!((s.dim_est.unwrap() - 1.0).abs() < 0.2);
    }
}
