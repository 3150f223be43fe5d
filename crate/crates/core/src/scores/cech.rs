//! Scores built on the Čech complex: clique counts, down degrees and
//! intrinsic volumes of the union of balls.

use super::{ScoreError, ScoreFunction};
use crate::geometry::{miniball, Point, SpatialIndex};
use crate::scalar::Real;
use std::f64::consts::{PI, TAU};

/// Čech membership: the closed r-balls around `pts` share a point.
pub fn is_cech<T: Real>(pts: &[Point<T>], r: T) -> bool {
    match pts.len() {
        0 | 1 => true,
        2 => pts[0].dist2(&pts[1]) <= T::of(4.0) * r * r,
        _ => miniball(pts).map_or(false, |b| {
            b.radius <= r * (T::one() + T::epsilon() * T::of(16.0))
        }),
    }
}

/// Visits every Čech simplex containing point `i` with at most `max_size`
/// vertices; the slice starts with `i`, the rest ascend.
pub(crate) fn for_each_simplex_at<T: Real, F: FnMut(&[usize], &[Point<T>])>(
    index: &SpatialIndex<T>,
    i: usize,
    r: T,
    max_size: usize,
    f: &mut F,
) {
    let x = *index.point(i);
    let cand = index.neighbors_within(&x, r + r);
    let mut ids = vec![i];
    let mut pts = vec![x];
    grow(index, &cand, 0, r, max_size, &mut ids, &mut pts, f);
}

#[allow(clippy::too_many_arguments)]
fn grow<T: Real, F: FnMut(&[usize], &[Point<T>])>(
    index: &SpatialIndex<T>,
    cand: &[usize],
    start: usize,
    r: T,
    max_size: usize,
    ids: &mut Vec<usize>,
    pts: &mut Vec<Point<T>>,
    f: &mut F,
) {
    f(ids, pts);
    if ids.len() >= max_size {
        return;
    }
    let four_r2 = T::of(4.0) * r * r;
    for c in start..cand.len() {
        let y = *index.point(cand[c]);
        if pts[1..].iter().any(|p| p.dist2(&y) > four_r2) {
            continue;
        }
        pts.push(y);
        if is_cech(pts, r) {
            ids.push(cand[c]);
            grow(index, cand, c + 1, r, max_size, ids, pts, f);
            ids.pop();
        }
        pts.pop();
    }
}

/// A simplicial complex on k ≤ 4 labelled vertices, stored as a bitset over
/// vertex subsets (bit `m` set when subset mask `m` is a face of size ≥ 2).
#[derive(Clone, Debug, PartialEq)]
pub struct CechPattern {
    k: usize,
    orbit: Vec<u32>,
}

impl CechPattern {
    /// The complex generated by `simplices` (vertex lists over 0..k).
    pub fn new(k: usize, simplices: &[Vec<usize>]) -> Result<Self, ScoreError> {
        if !(2..=4).contains(&k) {
            return Err(ScoreError::InvalidParameter(format!(
                "pattern order {k} outside 2..=4"
            )));
        }
        let mut faces = 0u32;
        for s in simplices {
            if s.iter().any(|&v| v >= k) {
                return Err(ScoreError::InvalidParameter(
                    "pattern vertex out of range".into(),
                ));
            }
            let m: u32 = s.iter().map(|&v| 1u32 << v).fold(0, |a, b| a | b);
            for sub in 1..(1u32 << k) {
                if sub & m == sub && sub.count_ones() >= 2 {
                    faces |= 1 << sub;
                }
            }
        }
        // the 1-skeleton must be connected, otherwise the score has no finite range
        let mut seen = 1u32;
        loop {
            let mut next = seen;
            for a in 0..k {
                for b in 0..k {
                    if seen & (1 << a) != 0 && faces & (1 << ((1u32 << a) | (1 << b))) != 0 {
                        next |= 1 << b;
                    }
                }
            }
            if next == seen {
                break;
            }
            seen = next;
        }
        if seen.count_ones() as usize != k {
            return Err(ScoreError::InvalidParameter(
                "pattern 1-skeleton is disconnected".into(),
            ));
        }
        let mut orbit = Vec::new();
        let mut perm: Vec<usize> = (0..k).collect();
        permutations(&mut perm, 0, &mut |p| {
            let mut img = 0u32;
            for sub in 1..(1u32 << k) {
                if faces & (1 << sub) != 0 {
                    let mapped: u32 = (0..k)
                        .filter(|&v| sub & (1 << v) != 0)
                        .map(|v| 1u32 << p[v])
                        .sum();
                    img |= 1 << mapped;
                }
            }
            orbit.push(img);
        });
        orbit.sort_unstable();
        orbit.dedup();
        Ok(CechPattern { k, orbit })
    }

    fn matches(&self, faces: u32) -> bool {
        self.orbit.binary_search(&faces).is_ok()
    }
}

fn permutations(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permutations(p, i + 1, f);
        p.swap(i, j);
    }
}

fn complex_of<T: Real>(pts: &[Point<T>], r: T) -> u32 {
    let k = pts.len();
    let mut faces = 0u32;
    for sub in 1..(1u32 << k) {
        if sub.count_ones() >= 2 {
            let s: Vec<Point<T>> = (0..k)
                .filter(|&v| sub & (1 << v) != 0)
                .map(|v| pts[v])
                .collect();
            if is_cech(&s, r) {
                faces |= 1 << sub;
            }
        }
    }
    faces
}

/// γ^{(k)}: the number of (k−1)-simplices (or pattern copies) through x,
/// divided by k so that H counts each once.
#[derive(Clone, Debug)]
pub struct CliqueCount<T> {
    pub k: usize,
    pub r: T,
    pub pattern: Option<CechPattern>,
}

impl<T: Real> CliqueCount<T> {
    pub fn new(k: usize, r: T) -> Result<Self, ScoreError> {
        if k == 0 || !(r > T::zero()) {
            return Err(ScoreError::InvalidParameter(
                "clique count needs k ≥ 1, r > 0".into(),
            ));
        }
        Ok(CliqueCount {
            k,
            r,
            pattern: None,
        })
    }

    pub fn with_pattern(r: T, pattern: CechPattern) -> Result<Self, ScoreError> {
        let mut s = Self::new(pattern.k, r)?;
        s.pattern = Some(pattern);
        Ok(s)
    }
}

impl<T: Real> ScoreFunction<T> for CliqueCount<T> {
    fn name(&self) -> String {
        match self.pattern {
            None => format!("clique_count(k={}, r={})", self.k, self.r),
            Some(_) => format!("clique_pattern(k={}, r={})", self.k, self.r),
        }
    }

    fn evaluate(&self, index: &SpatialIndex<T>, i: usize) -> T {
        let k = self.k;
        let count = match &self.pattern {
            None => {
                let mut n = 0usize;
                for_each_simplex_at(index, i, self.r, k, &mut |ids, _| {
                    n += usize::from(ids.len() == k)
                });
                n
            }
            Some(pat) => {
                let x = *index.point(i);
                let reach = self.r * T::of(2.0 * (k - 1) as f64);
                let cand = index.neighbors_within(&x, reach);
                let mut n = 0usize;
                let mut pts = vec![x];
                choose(&cand, k - 1, 0, &mut Vec::new(), &mut |sel| {
                    pts.truncate(1);
                    pts.extend(sel.iter().map(|&j| *index.point(j)));
                    n += usize::from(pat.matches(complex_of(&pts, self.r)));
                });
                n
            }
        };
        T::of(count as f64 / k as f64)
    }

    fn stabilization_radius(&self, _: &SpatialIndex<T>, _: usize) -> Option<T> {
        self.interaction_range()
    }

    fn interaction_range(&self) -> Option<T> {
        Some(self.r * T::of(2.0 * (self.k.max(2) - 1) as f64))
    }
}

fn choose(
    cand: &[usize],
    need: usize,
    start: usize,
    sel: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if sel.len() == need {
        f(sel);
        return;
    }
    for c in start..cand.len() {
        if cand.len() - c < need - sel.len() {
            break;
        }
        sel.push(cand[c]);
        choose(cand, need, c + 1, sel, f);
        sel.pop();
    }
}

/// ξ^{(k)}: number of ordered pairs (σ₁, σ₂) of down-adjacent k-simplices with
/// x ∈ σ₁ \ σ₂. Summed over x this is the total down degree.
#[derive(Clone, Copy, Debug)]
pub struct DownDegree<T> {
    pub k: usize,
    pub r: T,
}

impl<T: Real> ScoreFunction<T> for DownDegree<T> {
    fn name(&self) -> String {
        format!("degree(k={}, r={})", self.k, self.r)
    }

    fn evaluate(&self, index: &SpatialIndex<T>, i: usize) -> T {
        let (k, r) = (self.k, self.r);
        let mut total = 0usize;
        for_each_simplex_at(index, i, r, k + 1, &mut |ids, pts| {
            if ids.len() != k + 1 {
                return;
            }
            let face = &pts[1..];
            let mut trial: Vec<Point<T>> = face.to_vec();
            index.for_each_within(&face[0], r + r, |y, _| {
                if ids.contains(&y) {
                    return;
                }
                trial.truncate(k);
                trial.push(*index.point(y));
                total += usize::from(is_cech(&trial, r));
            });
        });
        T::of(total as f64)
    }

    fn stabilization_radius(&self, _: &SpatialIndex<T>, _: usize) -> Option<T> {
        self.interaction_range()
    }

    fn interaction_range(&self) -> Option<T> {
        Some(self.r * T::of(4.0))
    }
}

/// Area and perimeter of the intersection of equal closed disks with
/// distinct centers, from the boundary arcs (Green's theorem).
pub fn disk_intersection(centers: &[[f64; 2]], r: f64) -> (f64, f64) {
    match centers.len() {
        0 => return (0.0, 0.0),
        1 => return (PI * r * r, TAU * r),
        _ => {}
    }
    // work relative to the first center to keep the Green sums well conditioned
    let o = centers[0];
    let c: Vec<[f64; 2]> = centers.iter().map(|p| [p[0] - o[0], p[1] - o[1]]).collect();
    let (mut area, mut per) = (0.0, 0.0);
    for i in 0..c.len() {
        let mut arcs = vec![(0.0, TAU)];
        for j in 0..c.len() {
            if j == i {
                continue;
            }
            let (dx, dy) = (c[j][0] - c[i][0], c[j][1] - c[i][1]);
            let d = dx.hypot(dy);
            if d >= 2.0 * r {
                return (0.0, 0.0);
            }
            let half = (d / (2.0 * r)).acos();
            arcs = intersect(&arcs, &wrap(dy.atan2(dx) - half, 2.0 * half));
            if arcs.is_empty() {
                break;
            }
        }
        for (a, b) in arcs {
            per += r * (b - a);
            area += 0.5
                * (r * r * (b - a) + c[i][0] * r * (b.sin() - a.sin())
                    - c[i][1] * r * (b.cos() - a.cos()));
        }
    }
    (area.max(0.0), per)
}

fn wrap(lo: f64, width: f64) -> Vec<(f64, f64)> {
    let a = lo.rem_euclid(TAU);
    let b = a + width;
    if b <= TAU {
        vec![(a, b)]
    } else {
        vec![(0.0, b - TAU), (a, TAU)]
    }
}

fn intersect(x: &[(f64, f64)], y: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in x {
        for &(c, d) in y {
            let (lo, hi) = (a.max(c), b.min(d));
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    out
}

/// ξ_j for the union of r-disks: inclusion–exclusion over the Čech simplices
/// through x, each weighted by 1/|S|. j = 0 works in any dimension (nerve),
/// j = 1, 2 need d = 2.
#[derive(Clone, Copy, Debug)]
pub struct IntrinsicVolume<T> {
    pub j: usize,
    pub r: T,
}

impl<T: Real> IntrinsicVolume<T> {
    pub fn new(j: usize, r: T) -> Result<Self, ScoreError> {
        if j > 2 || !(r > T::zero()) {
            return Err(ScoreError::InvalidParameter(
                "intrinsic volume needs j ∈ {0,1,2}, r > 0".into(),
            ));
        }
        Ok(IntrinsicVolume { j, r })
    }
}

impl<T: Real> ScoreFunction<T> for IntrinsicVolume<T> {
    fn name(&self) -> String {
        format!("intrinsic_volume(j={}, r={})", self.j, self.r)
    }

    fn check_dim(&self, d: usize) -> Result<(), ScoreError> {
        if self.j > 0 && d != 2 {
            return Err(ScoreError::UnsupportedDimension {
                score: self.name(),
                d,
            });
        }
        Ok(())
    }

    fn evaluate(&self, index: &SpatialIndex<T>, i: usize) -> T {
        let r = self.r.f64();
        let mut acc = 0.0;
        for_each_simplex_at(index, i, self.r, usize::MAX, &mut |ids, pts| {
            let m = ids.len();
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            let v = match self.j {
                0 => 1.0,
                j => {
                    let c: Vec<[f64; 2]> = pts
                        .iter()
                        .map(|p| [p.coord(0).f64(), p.coord(1).f64()])
                        .collect();
                    let (area, per) = disk_intersection(&c, r);
                    if j == 2 {
                        area
                    } else {
                        per / 2.0
                    }
                }
            };
            acc += sign * v / m as f64;
        });
        T::of(acc)
    }

    fn stabilization_radius(&self, _: &SpatialIndex<T>, _: usize) -> Option<T> {
        self.interaction_range()
    }

    fn interaction_range(&self) -> Option<T> {
        Some(self.r + self.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lens_area_matches_formula() {
        let r: f64 = 1.0;
        for &d in &[0.1, 0.7, 1.3, 1.99] {
            let (a, p) = disk_intersection(&[[0.3, -2.0], [0.3 + d, -2.0]], r);
            let want =
                2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt();
            assert!((a - want).abs() < 1e-12, "{a} {want}");
            assert!((p - 4.0 * r * (d / (2.0 * r)).acos()).abs() < 1e-12);
        }
        assert_eq!(
            disk_intersection(&[[0.0, 0.0], [2.0, 0.0]], 1.0),
            (0.0, 0.0)
        );
    }

    #[test]
    fn triple_intersection_against_grid() {
        let c = [[0.0, 0.0], [0.8, 0.1], [0.3, 0.7]];
        let (a, _) = disk_intersection(&c, 1.0);
        let n = 2000;
        let mut hits = 0usize;
        for ix in 0..n {
            for iy in 0..n {
                let x = -1.0 + 3.0 * (ix as f64 + 0.5) / n as f64;
                let y = -1.0 + 3.0 * (iy as f64 + 0.5) / n as f64;
                hits += usize::from(c.iter().all(|p| (x - p[0]).hypot(y - p[1]) <= 1.0));
            }
        }
        let grid = hits as f64 * 9.0 / (n * n) as f64;
        assert!((a - grid).abs() < 2e-3, "{a} {grid}");
    }

    #[test]
    fn pattern_orbits() {
        // path on 3 vertices has 3 labelled copies, the hollow triangle one
        let path = CechPattern::new(3, &[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(path.orbit.len(), 3);
        let hollow = CechPattern::new(3, &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let filled = CechPattern::new(3, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(hollow.orbit.len(), 1);
        assert_ne!(hollow.orbit, filled.orbit);
        assert!(CechPattern::new(3, &[vec![0, 1]]).is_err());
    }
}
