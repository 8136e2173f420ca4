//! Numerical laboratory for mean curvature flows and the behaviour of their
//! intersections.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axisym;
pub mod csf;
pub mod error;
pub mod geometry;
pub mod graphical;
pub mod lab;
pub mod levelset;
pub mod svg;
pub mod verdict;

pub use error::{Error, Result};
pub use geometry::{IntersectionSample, PointCloud, Polyline, ScalarField2D, Vec2};
pub use verdict::Verdict;
