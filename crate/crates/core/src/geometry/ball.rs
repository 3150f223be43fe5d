use super::{GeometryError, Point};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball<T> {
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Real> Ball<T> {
    pub fn contains(&self, p: &Point<T>) -> bool {
        let slack = T::CONTAIN_TOL * (T::one() + self.radius);
        p.dist(&self.center) <= self.radius + slack
    }
}

/// Solves the k×k system `a x = b` (k ≤ 3) by partially pivoted elimination.
/// Pivots below PIVOT_TOL times the largest diagonal magnitude are degenerate.
fn solve_small<T: Real>(
    mut a: [[T; 3]; 3],
    mut b: [T; 3],
    k: usize,
) -> Result<[T; 3], GeometryError> {
    let scale = (0..k)
        .map(|i| a[i][i].abs())
        .fold(T::zero(), |m, v| m.max(v));
    if !(scale > T::zero()) {
        return Err(GeometryError::Degenerate);
    }
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[piv][col].abs() <= T::PIVOT_TOL * scale {
            return Err(GeometryError::Degenerate);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for c in col..k {
                let v = a[col][c];
                a[row][c] = a[row][c] - f * v;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..k).rev() {
        let mut s = b[row];
        for c in row + 1..k {
            s = s - a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

/// Affine coordinates of `c` relative to the simplex `pts` (Gram system).
fn affine_coords<T: Real>(pts: &[Point<T>], c: &Point<T>) -> Result<[T; 3], GeometryError> {
    let k = pts.len() - 1;
    let p0 = pts[0];
    let v: Vec<Point<T>> = pts[1..].iter().map(|p| *p - p0).collect();
    let mut g = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    let w = *c - p0;
    for i in 0..k {
        for j in 0..k {
            g[i][j] = v[i].dot(&v[j]);
        }
        rhs[i] = v[i].dot(&w);
    }
    solve_small(g, rhs, k)
}

/// Center and radius of the sphere through k+1 affinely independent points,
/// centered in their affine hull (k ≤ d).
pub fn circumsphere<T: Real>(pts: &[Point<T>]) -> Result<Ball<T>, GeometryError> {
    if pts.is_empty() {
        return Err(GeometryError::Empty);
    }
    let d = pts[0].dim();
    if pts.len() > d + 1 {
        return Err(GeometryError::Degenerate);
    }
    let k = pts.len() - 1;
    if k == 0 {
        return Ok(Ball {
            center: pts[0],
            radius: T::zero(),
        });
    }
    let p0 = pts[0];
    let v: Vec<Point<T>> = pts[1..].iter().map(|p| *p - p0).collect();
    let mut g = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    for i in 0..k {
        for j in 0..k {
            g[i][j] = v[i].dot(&v[j]);
        }
        rhs[i] = v[i].norm2() / T::of(2.0);
    }
    let lam = solve_small(g, rhs, k)?;
    let mut off = Point::origin(d);
    for i in 0..k {
        off = off + v[i] * lam[i];
    }
    Ok(Ball {
        center: p0 + off,
        radius: off.norm(),
    })
}

/// Whether `c` lies in the relative interior of the simplex spanned by `pts`.
pub fn in_open_convex_hull<T: Real>(c: &Point<T>, pts: &[Point<T>]) -> Result<bool, GeometryError> {
    if pts.is_empty() {
        return Err(GeometryError::Empty);
    }
    if pts.len() == 1 {
        return Ok(*c == pts[0]);
    }
    if pts.len() > pts[0].dim() + 1 {
        return Err(GeometryError::Degenerate);
    }
    let lam = affine_coords(pts, c)?;
    let k = pts.len() - 1;
    let p0 = pts[0];
    let mut proj = p0;
    let mut scale = T::zero();
    for i in 0..k {
        let v = pts[i + 1] - p0;
        proj = proj + v * lam[i];
        scale = scale.max(v.norm());
    }
    if proj.dist(c) > T::CONTAIN_TOL * scale {
        return Ok(false);
    }
    let l0 = T::one() - (0..k).map(|i| lam[i]).sum::<T>();
    let eps = T::PIVOT_TOL;
    Ok(l0 > eps && (0..k).all(|i| lam[i] > eps))
}

fn ball_from_support<T: Real>(support: &[Point<T>]) -> Option<Ball<T>> {
    match support.len() {
        0 => None,
        1 => Some(Ball {
            center: support[0],
            radius: T::zero(),
        }),
        _ => circumsphere(support).ok(),
    }
}

fn welzl<T: Real>(
    pts: &[Point<T>],
    support: &mut Vec<Point<T>>,
    d: usize,
) -> Result<Option<Ball<T>>, GeometryError> {
    if pts.is_empty() || support.len() == d + 1 {
        return match ball_from_support(support) {
            Some(b) => Ok(Some(b)),
            None if support.is_empty() => Ok(None),
            None => Err(GeometryError::Degenerate),
        };
    }
    let (last, rest) = pts.split_last().unwrap();
    let ball = welzl(rest, support, d)?;
    if let Some(b) = ball {
        if b.contains(last) {
            return Ok(Some(b));
        }
    }
    support.push(*last);
    let b = welzl(rest, support, d);
    support.pop();
    b
}

/// Smallest enclosing ball (Welzl). Falls back to the exhaustive support search
/// when rounding makes a support set numerically degenerate.
pub fn miniball<T: Real>(pts: &[Point<T>]) -> Result<Ball<T>, GeometryError> {
    if pts.is_empty() {
        return Err(GeometryError::Empty);
    }
    let d = pts[0].dim();
    let mut support = Vec::with_capacity(d + 1);
    match welzl(pts, &mut support, d) {
        Ok(Some(b)) if pts.iter().all(|p| b.contains(p)) => Ok(b),
        _ => miniball_exhaustive(pts),
    }
}

/// Minimum over all affinely independent support subsets of size ≤ d+1 of the
/// circumscribed ball that contains every point.
pub fn miniball_exhaustive<T: Real>(pts: &[Point<T>]) -> Result<Ball<T>, GeometryError> {
    if pts.is_empty() {
        return Err(GeometryError::Empty);
    }
    let d = pts[0].dim();
    let n = pts.len();
    let mut best: Option<Ball<T>> = None;
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size > d + 1 {
            continue;
        }
        let sub: Vec<Point<T>> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| pts[i])
            .collect();
        if let Ok(b) = circumsphere(&sub) {
            if pts.iter().all(|p| b.contains(p)) && best.map_or(true, |bb| b.radius < bb.radius) {
                best = Some(b);
            }
        }
    }
    best.ok_or(GeometryError::Degenerate)
}
