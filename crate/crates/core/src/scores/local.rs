//! Constant, edge-length, Morse and coverage scores.

use super::{ScoreError, ScoreFunction};
use crate::geometry::{circumsphere, in_open_convex_hull, Point, SpatialIndex};
use crate::scalar::Real;

/// ξ ≡ c, turning H into c times the point count.
#[derive(Clone, Copy, Debug)]
pub struct Constant<T> {
    pub value: T,
}

impl<T: Real> ScoreFunction<T> for Constant<T> {
    fn name(&self) -> String {
        format!("constant({})", self.value)
    }

    fn evaluate(&self, _: &SpatialIndex<T>, _: usize) -> T {
        self.value
    }

    fn stabilization_radius(&self, _: &SpatialIndex<T>, _: usize) -> Option<T> {
        Some(T::zero())
    }

    fn interaction_range(&self) -> Option<T> {
        Some(T::zero())
    }
}

/// ξ^L: half the length of the edges of G(X, r) at x.
#[derive(Clone, Copy, Debug)]
pub struct EdgeLength<T> {
    pub r: T,
}

impl<T: Real> ScoreFunction<T> for EdgeLength<T> {
    fn name(&self) -> String {
        format!("edge_length(r={})", self.r)
    }

    fn evaluate(&self, index: &SpatialIndex<T>, i: usize) -> T {
        let mut acc = T::zero();
        index.for_each_within(index.point(i), self.r, |_, d2| acc = acc + d2.sqrt());
        acc / T::of(2.0)
    }

    fn stabilization_radius(&self, _: &SpatialIndex<T>, _: usize) -> Option<T> {
        Some(self.r)
    }

    fn interaction_range(&self) -> Option<T> {
        Some(self.r)
    }
}

/// Index-k critical points of the distance function in d = 2: a (k+1)-set
/// whose circumcenter lies in its open hull, with circumradius ≤ r and no
/// other point in the open circumball. Each set gives 1/(k+1) to each member.
#[derive(Clone, Copy, Debug)]
pub struct Morse<T> {
    pub k: usize,
    pub r: T,
}

impl<T: Real> Morse<T> {
    pub fn new(k: usize, r: T) -> Result<Self, ScoreError> {
        if !(1..=2).contains(&k) || !(r > T::zero()) {
            return Err(ScoreError::InvalidParameter(
                "Morse score needs k ∈ {1,2}, r > 0".into(),
            ));
        }
        Ok(Morse { k, r })
    }

    fn critical(&self, index: &SpatialIndex<T>, ids: &[usize]) -> bool {
        let pts: Vec<Point<T>> = ids.iter().map(|&j| *index.point(j)).collect();
        let Ok(ball) = circumsphere(&pts) else {
            return false;
        };
        if ball.radius > self.r || !in_open_convex_hull(&ball.center, &pts).unwrap_or(false) {
            return false;
        }
        let inner = ball.radius * ball.radius * (T::one() - T::of(1e-9));
        let mut empty = index.position(&ball.center).is_none();
        index.for_each_within(&ball.center, ball.radius, |j, d2| {
            if d2 < inner && !ids.contains(&j) {
                empty = false;
            }
        });
        empty
    }
}

impl<T: Real> ScoreFunction<T> for Morse<T> {
    fn name(&self) -> String {
        format!("morse(k={}, r={})", self.k, self.r)
    }

    fn check_dim(&self, d: usize) -> Result<(), ScoreError> {
        if d != 2 {
            return Err(ScoreError::UnsupportedDimension {
                score: self.name(),
                d,
            });
        }
        Ok(())
    }

    fn evaluate(&self, index: &SpatialIndex<T>, i: usize) -> T {
        let cand = index.neighbors_within(index.point(i), self.r + self.r);
        let mut n = 0usize;
        for (a, &ya) in cand.iter().enumerate() {
            if self.k == 1 {
                n += usize::from(self.critical(index, &[i, ya]));
            } else {
                for &yb in &cand[a + 1..] {
                    n += usize::from(self.critical(index, &[i, ya, yb]));
                }
            }
        }
        T::of(n as f64 / (self.k + 1) as f64)
    }

    fn stabilization_radius(&self, _: &SpatialIndex<T>, _: usize) -> Option<T> {
        self.interaction_range()
    }

    fn interaction_range(&self) -> Option<T> {
        Some(self.r + self.r)
    }
}

pub const DEFAULT_COVERAGE_NODES: usize = 4096;

/// Equal-weight nodes in the unit ball: a Vogel spiral in d = 2, midpoints in
/// d = 1, Halton points (bases 2, 3, 5) accepted inside the ball in d = 3.
pub fn ball_nodes(d: usize, n: usize) -> Vec<[f64; 3]> {
    match d {
        1 => (0..n)
            .map(|i| [-1.0 + (2 * i + 1) as f64 / n as f64, 0.0, 0.0])
            .collect(),
        2 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let rho = ((i as f64 + 0.5) / n as f64).sqrt();
                    let th = i as f64 * golden;
                    [rho * th.cos(), rho * th.sin(), 0.0]
                })
                .collect()
        }
        _ => {
            let mut out = Vec::with_capacity(n);
            let mut i = 1u64;
            while out.len() < n {
                let p = [
                    2.0 * halton(i, 2) - 1.0,
                    2.0 * halton(i, 3) - 1.0,
                    2.0 * halton(i, 5) - 1.0,
                ];
                if p.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                    out.push(p);
                }
                i += 1;
            }
            out
        }
    }
}

fn halton(mut i: u64, b: u64) -> f64 {
    let (mut f, mut x) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        x += f * (i % b) as f64;
        i /= b;
    }
    x
}

pub(crate) fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI / 3.0,
    }
}

/// β^{(k)}: ∫_{B_r(x)} 1[X(B_r(y)) ≥ k] / X(B_r(y)) dy by deterministic quadrature.
/// Summed over x this is the volume of the k-covered region.
#[derive(Clone, Debug)]
pub struct Coverage<T> {
    pub k: usize,
    pub r: T,
    nodes: [Vec<[f64; 3]>; 3],
}

impl<T: Real> Coverage<T> {
    pub fn new(k: usize, r: T, nodes: usize) -> Result<Self, ScoreError> {
        if k == 0 || !(r > T::zero()) || nodes == 0 {
            return Err(ScoreError::InvalidParameter(
                "coverage needs k ≥ 1, r > 0 and nodes > 0".into(),
            ));
        }
        Ok(Coverage {
            k,
            r,
            nodes: [
                ball_nodes(1, nodes),
                ball_nodes(2, nodes),
                ball_nodes(3, nodes),
            ],
        })
    }
}

impl<T: Real> ScoreFunction<T> for Coverage<T> {
    fn name(&self) -> String {
        format!("coverage(k={}, r={})", self.k, self.r)
    }

    fn evaluate(&self, index: &SpatialIndex<T>, i: usize) -> T {
        let x = *index.point(i);
        let d = x.dim();
        let nodes = &self.nodes[d - 1];
        let mut acc = 0.0;
        let mut y = x;
        for u in nodes {
            let mut c = [T::zero(); 3];
            for a in 0..d {
                c[a] = x.coord(a) + self.r * T::of(u[a]);
            }
            y = Point::new(&c[..d]).unwrap_or(y);
            let count = index.count_within(&y, self.r);
            if count >= self.k {
                acc += 1.0 / count as f64;
            }
        }
        let w = unit_ball_volume(d) * self.r.f64().powi(d as i32) / nodes.len() as f64;
        T::of(acc * w)
    }

    fn stabilization_radius(&self, _: &SpatialIndex<T>, _: usize) -> Option<T> {
        self.interaction_range()
    }

    fn interaction_range(&self) -> Option<T> {
        Some(self.r + self.r)
    }
}
