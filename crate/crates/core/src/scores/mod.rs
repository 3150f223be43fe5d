//! Score functions ξ(x, X) and the statistics H, Ĥ and μ(f) built from them.

mod cech;
mod knn;
mod local;
mod spec;

pub use cech::{disk_intersection, is_cech, CechPattern, CliqueCount, DownDegree, IntrinsicVolume};
pub use knn::KnnEdgeLength;
pub use local::{ball_nodes, Constant, Coverage, EdgeLength, Morse, DEFAULT_COVERAGE_NODES};
pub use spec::{ScoreSpec, TestFunction};

use crate::geometry::{Point, SpatialIndex};
use crate::processes::PointConfiguration;
use crate::scalar::Real;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("invalid score parameter: {0}")]
    InvalidParameter(String),
    #[error("{score} is not defined in dimension {d}")]
    UnsupportedDimension { score: String, d: usize },
    #[error("buffer margin {margin} is below the stabilization cap {required}")]
    BufferTooSmall { margin: f64, required: f64 },
}

/// A translation-invariant score. Points are addressed by their id in a
/// spatial index built over the whole configuration.
pub trait ScoreFunction<T: Real>: Send + Sync {
    fn name(&self) -> String;

    fn check_dim(&self, _d: usize) -> Result<(), ScoreError> {
        Ok(())
    }

    /// ξ(x_i, X).
    fn evaluate(&self, index: &SpatialIndex<T>, i: usize) -> T;

    /// Realized radius of stabilization at x_i; None when unbounded.
    fn stabilization_radius(&self, index: &SpatialIndex<T>, i: usize) -> Option<T>;

    /// Configuration-free bound on the stabilization radius, if the family has one.
    fn interaction_range(&self) -> Option<T>;

    /// ξ(x, X), zero when x ∉ X.
    fn score_at(&self, x: &Point<T>, points: &[Point<T>]) -> T {
        let index = index_for(self, points);
        index
            .position(x)
            .map_or(T::zero(), |i| self.evaluate(&index, i))
    }
}

/// Grid index with cells matched to the score's range (or the mean spacing).
pub fn index_for<T: Real, S: ScoreFunction<T> + ?Sized>(
    score: &S,
    points: &[Point<T>],
) -> SpatialIndex<T> {
    let range = score.interaction_range().filter(|r| *r > T::zero());
    let cell = range.unwrap_or_else(|| {
        let d = points.first().map_or(2, |p| p.dim());
        let mut lo = [T::infinity(); 3];
        let mut hi = [T::neg_infinity(); 3];
        for p in points {
            for a in 0..d {
                lo[a] = lo[a].min(p.coord(a));
                hi[a] = hi[a].max(p.coord(a));
            }
        }
        let vol = (0..d).fold(T::one(), |v, a| v * (hi[a] - lo[a]).max(T::epsilon()));
        let spacing = (vol / T::of(points.len().max(1) as f64)).powf(T::one() / T::of(d as f64));
        if spacing > T::zero() && spacing.is_finite() {
            spacing * T::of(2.0)
        } else {
            T::one()
        }
    });
    SpatialIndex::build(points, cell)
}

/// Scores of the listed ids, evaluated in parallel and returned in order.
pub fn scores_of<T: Real, S: ScoreFunction<T> + ?Sized>(
    score: &S,
    index: &SpatialIndex<T>,
    ids: &[usize],
) -> Vec<T> {
    ids.par_iter().map(|&i| score.evaluate(index, i)).collect()
}

fn ordered_sum<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a + b)
}

/// H = Σ_{x ∈ X ∩ W} ξ(x, X ∩ W); any buffer points are dropped first.
pub fn total_statistic<T: Real, S: ScoreFunction<T> + ?Sized>(
    score: &S,
    cfg: &PointConfiguration<T>,
) -> Result<T, ScoreError> {
    score.check_dim(cfg.dim())?;
    let inner = cfg.restricted();
    let index = index_for(score, inner.points());
    let ids: Vec<usize> = (0..inner.len()).collect();
    Ok(ordered_sum(&scores_of(score, &index, &ids)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Buffered<T> {
    pub value: T,
    /// Window points whose realized stabilization radius reaches past the buffer.
    pub overruns: usize,
    pub window_points: usize,
}

/// Ĥ = Σ_{x ∈ X ∩ W} ξ(x, X) with X the whole buffered sample. Fails when the
/// buffer margin is below `rho_max`; individual overruns are counted.
pub fn buffered_statistic<T: Real, S: ScoreFunction<T> + ?Sized>(
    score: &S,
    cfg: &PointConfiguration<T>,
    rho_max: T,
) -> Result<Buffered<T>, ScoreError> {
    let (b, vals) = buffered_scores(score, cfg, rho_max)?;
    Ok(Buffered {
        value: ordered_sum(&vals),
        ..b
    })
}

/// Per-point scores behind `buffered_statistic`, in window-point order.
pub fn buffered_scores<T: Real, S: ScoreFunction<T> + ?Sized>(
    score: &S,
    cfg: &PointConfiguration<T>,
    rho_max: T,
) -> Result<(Buffered<T>, Vec<T>), ScoreError> {
    score.check_dim(cfg.dim())?;
    let margin = cfg.margin();
    if margin < rho_max {
        return Err(ScoreError::BufferTooSmall {
            margin: margin.f64(),
            required: rho_max.f64(),
        });
    }
    let index = index_for(score, cfg.points());
    let ids = cfg.window_indices();
    let region = *cfg.region();
    let fixed = score.interaction_range();
    let overruns = match fixed {
        Some(r) if r <= margin => 0,
        _ => ids
            .par_iter()
            .filter(|&&i| match score.stabilization_radius(&index, i) {
                Some(r) => r > region.margin_of(index.point(i)),
                None => true,
            })
            .count(),
    };
    let vals = scores_of(score, &index, &ids);
    Ok((
        Buffered {
            value: T::zero(),
            overruns,
            window_points: ids.len(),
        },
        vals,
    ))
}

/// μ_n^ξ = Σ ξ(x, P_n) δ_{n^{−1/d} x}.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedMeasure<T> {
    pub atoms: Vec<(Point<T>, T)>,
    pub n: T,
}

impl<T: Real> WeightedMeasure<T> {
    pub fn new<S: ScoreFunction<T> + ?Sized>(
        score: &S,
        cfg: &PointConfiguration<T>,
    ) -> Result<Self, ScoreError> {
        score.check_dim(cfg.dim())?;
        let inner = cfg.restricted();
        let index = index_for(score, inner.points());
        let ids: Vec<usize> = (0..inner.len()).collect();
        let w = scores_of(score, &index, &ids);
        let n = inner.window().volume();
        let s = n.powf(-T::one() / T::of(cfg.dim() as f64));
        let atoms = inner
            .points()
            .iter()
            .zip(w)
            .map(|(p, v)| (p.scale(s), v))
            .collect();
        Ok(WeightedMeasure { atoms, n })
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().fold(T::zero(), |a, (_, w)| a + *w)
    }

    /// μ(f) = Σ f(atom)·weight.
    pub fn integral(&self, f: impl Fn(&Point<T>) -> T) -> T {
        self.atoms.iter().fold(T::zero(), |a, (p, w)| a + f(p) * *w)
    }
}

pub fn weighted_measure_integral<T: Real, S: ScoreFunction<T> + ?Sized>(
    score: &S,
    cfg: &PointConfiguration<T>,
    f: impl Fn(&Point<T>) -> T,
) -> Result<T, ScoreError> {
    Ok(WeightedMeasure::new(score, cfg)?.integral(f))
}
