use crate::geometry::SpatialIndex;
use crate::scalar::Real;
use crate::scores::{ScoreError, ScoreFunction};

/// ξ̃ = ξ·1[R^ξ ≤ t]: keeps the score where its realized stabilization
/// radius is at most t and zeroes it elsewhere, so t bounds its radius.
#[derive(Clone, Debug)]
pub struct Truncated<S, T> {
    pub inner: S,
    pub t: T,
}

impl<T: Real, S: ScoreFunction<T>> ScoreFunction<T> for Truncated<S, T> {
    fn name(&self) -> String {
        format!("truncated({}, t={})", self.inner.name(), self.t)
    }

    fn check_dim(&self, d: usize) -> Result<(), ScoreError> {
        self.inner.check_dim(d)
    }

    fn evaluate(&self, index: &SpatialIndex<T>, i: usize) -> T {
        match self.inner.stabilization_radius(index, i) {
            Some(r) if r <= self.t => self.inner.evaluate(index, i),
            _ => T::zero(),
        }
    }

    fn stabilization_radius(&self, _: &SpatialIndex<T>, _: usize) -> Option<T> {
        Some(self.t)
    }

    fn interaction_range(&self) -> Option<T> {
        Some(self.t)
    }
}
