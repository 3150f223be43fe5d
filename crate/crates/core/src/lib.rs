//! Point processes with fast decay of correlations: samplers, stabilizing
//! score functionals, and the moment/cumulant machinery used to check their
//! limit theory on finite windows.

extern crate openblas_src;

pub mod cumulants;
pub mod fme;
pub mod geometry;
pub mod moments;
pub mod processes;
pub mod runner;
pub mod scalar;
pub mod scores;

pub use scalar::Real;

pub type Point = geometry::Point<f64>;
pub type Window = geometry::Window<f64>;
pub type SpatialIndex = geometry::SpatialIndex<f64>;
pub type PointConfiguration = processes::PointConfiguration<f64>;
pub type Point32 = geometry::Point<f32>;
pub type Window32 = geometry::Window<f32>;
pub type PointConfiguration32 = processes::PointConfiguration<f32>;
