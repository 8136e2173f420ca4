//! Discrete curves, grids, and the estimators built on them.

pub mod cloud;
pub mod contour;
pub mod field;
pub mod intersect;
pub mod polyline;
pub mod sample;
pub mod shapes;
mod vec2;

pub use cloud::{
    box_dimension, count_components, directed_hausdorff, dyadic_scales, hausdorff_distance, measure_estimate,
    set_distance, unit_sphere_area, CloudMode, NearestGrid, PointCloud, UnionFind,
};
pub use contour::{contours, Contour};
pub use field::ScalarField2D;
pub use intersect::{polyline_intersections, self_intersections};
pub use polyline::{curvature, resample, Polyline};
pub use sample::{IntersectionSample, SampleScales};
pub use vec2::Vec2;
