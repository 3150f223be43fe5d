use super::{ScoreError, ScoreFunction};
use crate::geometry::{Point, SpatialIndex};
use crate::scalar::Real;
use std::f64::consts::PI;

/// ξ_L: half the length of the undirected k-NN edges at x (y ~ x when either
/// is among the other's k nearest; ties broken lexicographically).
#[derive(Clone, Copy, Debug)]
pub struct KnnEdgeLength {
    pub k: usize,
}

impl KnnEdgeLength {
    pub fn new(k: usize) -> Result<Self, ScoreError> {
        if k == 0 {
            return Err(ScoreError::InvalidParameter(
                "k-NN score needs k ≥ 1".into(),
            ));
        }
        Ok(KnnEdgeLength { k })
    }
}

/// Per-sector reach around x: for each of the six 60° cones (two half-lines
/// in d = 1) the side t of the smallest equilateral triangle at x holding k
/// points, or Err(farthest distance seen) when the cone holds fewer.
struct Sectors<T> {
    reach: Vec<Result<T, T>>,
}

fn sector_of<T: Real>(x: &Point<T>, y: &Point<T>) -> (usize, T) {
    if x.dim() == 1 {
        let dx = y.coord(0) - x.coord(0);
        return (usize::from(dx > T::zero()), dx.abs());
    }
    let (dx, dy) = (
        (y.coord(0) - x.coord(0)).f64(),
        (y.coord(1) - x.coord(1)).f64(),
    );
    let width = PI / 3.0;
    let m = (((dy.atan2(dx) + PI) / width).floor() as usize).min(5);
    let b = -PI + (m as f64 + 0.5) * width;
    let t = (dx * b.cos() + dy * b.sin()) / (3f64.sqrt() / 2.0);
    // t ≥ |y − x| up to rounding; never report less than the distance
    (m, T::of(t.max(dx.hypot(dy))))
}

fn sectors<T: Real>(index: &SpatialIndex<T>, x: &Point<T>, k: usize) -> Sectors<T> {
    let n_cones = if x.dim() == 1 { 2 } else { 6 };
    let others = index.len() - usize::from(index.position(x).is_some());
    let mut rho = index.cell_size();
    loop {
        let mut ts: Vec<Vec<T>> = vec![Vec::new(); n_cones];
        let mut far = vec![T::zero(); n_cones];
        let mut found = 0usize;
        index.for_each_within(x, rho, |j, d2| {
            let (m, t) = sector_of(x, index.point(j));
            ts[m].push(t);
            far[m] = far[m].max(d2.sqrt());
            found += 1;
        });
        let all = found == others;
        let mut reach = Vec::with_capacity(n_cones);
        let mut ok = true;
        for (m, t) in ts.iter_mut().enumerate() {
            t.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let within = t.iter().filter(|&&v| v <= rho).count();
            if within >= k {
                reach.push(Ok(t[k - 1]));
            } else if all {
                reach.push(Err(far[m]));
            } else {
                ok = false;
                break;
            }
        }
        if ok {
            return Sectors { reach };
        }
        rho = rho + rho;
    }
}

impl KnnEdgeLength {
    /// Distance beyond which no point can be a k-NN neighbor of x in either
    /// direction, or None in d = 3 (no sector bound).
    fn candidate_radius<T: Real>(&self, index: &SpatialIndex<T>, x: &Point<T>) -> Option<T> {
        if x.dim() == 3 {
            return None;
        }
        let s = sectors(index, x, self.k);
        Some(
            s.reach
                .iter()
                .map(|r| *r.as_ref().unwrap_or_else(|e| e))
                .fold(T::zero(), |a, b| a.max(b)),
        )
    }

    /// Ids adjacent to point i in the undirected k-NN graph.
    pub fn neighbors<T: Real>(&self, index: &SpatialIndex<T>, i: usize) -> Vec<usize> {
        let x = *index.point(i);
        let own: Vec<usize> = index
            .k_nearest(&x, self.k)
            .into_iter()
            .map(|(j, _)| j)
            .collect();
        let cand = match self.candidate_radius(index, &x) {
            // slack so that a point at exactly the reach survives sqrt/square rounding
            Some(r) => index.neighbors_within(&x, r * (T::one() + T::epsilon() * T::of(64.0))),
            None => (0..index.len()).filter(|&j| j != i).collect(),
        };
        cand.into_iter()
            .filter(|&j| {
                own.contains(&j)
                    || index
                        .k_nearest(index.point(j), self.k)
                        .iter()
                        .any(|&(m, _)| m == i)
            })
            .collect()
    }
}

impl<T: Real> ScoreFunction<T> for KnnEdgeLength {
    fn name(&self) -> String {
        format!("knn_edge_length(k={})", self.k)
    }

    fn evaluate(&self, index: &SpatialIndex<T>, i: usize) -> T {
        let x = index.point(i);
        let total = self
            .neighbors(index, i)
            .into_iter()
            .fold(T::zero(), |a, j| a + index.point(j).dist(x));
        total / T::of(2.0)
    }

    /// 4R with R the largest sector reach; unbounded when a sector is short of
    /// k points or in d = 3.
    fn stabilization_radius(&self, index: &SpatialIndex<T>, i: usize) -> Option<T> {
        let x = index.point(i);
        if x.dim() == 3 {
            return None;
        }
        let s = sectors(index, x, self.k);
        let mut big = T::zero();
        for r in s.reach {
            big = big.max(r.ok()?);
        }
        Some(big * T::of(4.0))
    }

    fn interaction_range(&self) -> Option<T> {
        None
    }
}
