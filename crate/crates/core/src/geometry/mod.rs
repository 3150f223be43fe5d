//! Windows, points, the grid index and small exact geometric primitives.

mod ball;
mod index;
mod point;
mod window;

pub use ball::{circumsphere, in_open_convex_hull, miniball, miniball_exhaustive, Ball};
pub use index::SpatialIndex;
pub use point::Point;
pub use window::{boundary_overlap, boundary_overlap_limit, build_window, Window};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("window volume must be positive and finite")]
    NonPositiveVolume,
    #[error("unsupported dimension {0}; expected 1, 2 or 3")]
    UnsupportedDimension(usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("empty point set")]
    Empty,
    #[error("degenerate point set")]
    Degenerate,
}

pub fn neighbors_within<T: crate::Real>(
    index: &SpatialIndex<T>,
    x: &Point<T>,
    r: T,
) -> Vec<Point<T>> {
    index
        .neighbors_within(x, r)
        .into_iter()
        .map(|i| *index.point(i))
        .collect()
}
