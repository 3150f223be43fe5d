use super::Point;
use crate::scalar::Real;
use std::cmp::Ordering;

/// Uniform grid over the bounding box of a point set, bucketed in CSR form.
#[derive(Clone, Debug)]
pub struct SpatialIndex<T> {
    pts: Vec<Point<T>>,
    d: usize,
    cell: T,
    lo: [T; 3],
    dims: [usize; 3],
    start: Vec<u32>,
    ids: Vec<u32>,
}

impl<T: Real> SpatialIndex<T> {
    /// Builds the grid; `cell` is a hint and is enlarged when it would create
    /// far more cells than points.
    pub fn build(points: &[Point<T>], cell: T) -> Self {
        let d = points.first().map(|p| p.dim()).unwrap_or(2);
        let mut lo = [T::zero(); 3];
        let mut hi = [T::zero(); 3];
        if let Some(p) = points.first() {
            lo = *p.raw();
            hi = *p.raw();
        }
        for p in points {
            for i in 0..d {
                lo[i] = lo[i].min(p.coord(i));
                hi[i] = hi[i].max(p.coord(i));
            }
        }
        let budget = (4 * points.len()).max(64) as f64;
        let mut cell = if cell > T::zero() && cell.is_finite() {
            cell
        } else {
            T::one()
        };
        let dims = loop {
            let mut dims = [1usize; 3];
            let mut total = 1.0f64;
            for i in 0..d {
                let k = ((hi[i] - lo[i]) / cell).f64().floor() + 1.0;
                dims[i] = k as usize;
                total *= k;
            }
            if total <= budget {
                break dims;
            }
            cell = cell * T::of((total / budget).powf(1.0 / d as f64).max(1.01));
        };
        let ncell = dims[0] * dims[1] * dims[2];
        let mut idx = SpatialIndex {
            pts: points.to_vec(),
            d,
            cell,
            lo,
            dims,
            start: vec![0; ncell + 1],
            ids: vec![0; points.len()],
        };
        let keys: Vec<usize> = points.iter().map(|p| idx.cell_of(p)).collect();
        for &k in &keys {
            idx.start[k + 1] += 1;
        }
        for c in 0..ncell {
            idx.start[c + 1] += idx.start[c];
        }
        let mut fill = idx.start.clone();
        for (i, &k) in keys.iter().enumerate() {
            idx.ids[fill[k] as usize] = i as u32;
            fill[k] += 1;
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.pts
    }

    pub fn point(&self, i: usize) -> &Point<T> {
        &self.pts[i]
    }

    pub fn cell_size(&self) -> T {
        self.cell
    }

    fn axis_cell(&self, i: usize, v: T) -> isize {
        ((v - self.lo[i]) / self.cell).f64().floor() as isize
    }

    fn cell_of(&self, p: &Point<T>) -> usize {
        let mut key = 0usize;
        for i in (0..3).rev() {
            let c = if i < self.d {
                self.axis_cell(i, p.coord(i))
                    .clamp(0, self.dims[i] as isize - 1)
            } else {
                0
            };
            key = key * self.dims[i] + c as usize;
        }
        key
    }

    /// Visits every indexed point y with 0 < |y − x| ≤ r, passing (id, |y − x|²).
    pub fn for_each_within<F: FnMut(usize, T)>(&self, x: &Point<T>, r: T, mut f: F) {
        if self.pts.is_empty() || r < T::zero() {
            return;
        }
        let r2 = r * r;
        let mut lo = [0isize; 3];
        let mut hi = [0isize; 3];
        for i in 0..3 {
            if i < self.d {
                lo[i] = self.axis_cell(i, x.coord(i) - r).max(0);
                hi[i] = self
                    .axis_cell(i, x.coord(i) + r)
                    .min(self.dims[i] as isize - 1);
                if lo[i] > hi[i] {
                    return;
                }
            }
        }
        for c2 in lo[2]..=hi[2] {
            for c1 in lo[1]..=hi[1] {
                let row = (c2 as usize * self.dims[1] + c1 as usize) * self.dims[0];
                let a = self.start[row + lo[0] as usize] as usize;
                let b = self.start[row + hi[0] as usize + 1] as usize;
                for &id in &self.ids[a..b] {
                    let id = id as usize;
                    let d2 = self.pts[id].dist2(x);
                    if d2 <= r2 && d2 > T::zero() {
                        f(id, d2);
                    }
                }
            }
        }
    }

    /// Ids of the points y ≠ x with |y − x| ≤ r (closed ball), ascending.
    pub fn neighbors_within(&self, x: &Point<T>, r: T) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(x, r, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    pub fn count_within(&self, x: &Point<T>, r: T) -> usize {
        let mut n = 0;
        self.for_each_within(x, r, |_, _| n += 1);
        n + usize::from(self.position(x).is_some())
    }

    /// Id of an indexed point with exactly the coordinates of `x`.
    pub fn position(&self, x: &Point<T>) -> Option<usize> {
        if self.pts.is_empty() {
            return None;
        }
        let k = self.cell_of(x);
        self.ids[self.start[k] as usize..self.start[k + 1] as usize]
            .iter()
            .map(|&i| i as usize)
            .find(|&i| self.pts[i] == *x)
    }

    /// The k points nearest to x (excluding any point equal to x), ordered by
    /// distance with ties broken lexicographically on coordinates.
    pub fn k_nearest(&self, x: &Point<T>, k: usize) -> Vec<(usize, T)> {
        if k == 0 || self.pts.is_empty() {
            return Vec::new();
        }
        let mut extent = T::zero();
        for i in 0..self.d {
            let top = self.lo[i] + self.cell * T::of(self.dims[i] as f64);
            extent = extent
                .max((x.coord(i) - self.lo[i]).abs())
                .max((top - x.coord(i)).abs());
        }
        let full = extent * T::of((self.d as f64).sqrt() + 1e-9) + self.cell;
        let mut r = self.cell;
        loop {
            let mut found: Vec<(usize, T)> = Vec::new();
            self.for_each_within(x, r, |i, d2| found.push((i, d2)));
            if found.len() >= k || r >= full {
                found.sort_by(|a, b| self.knn_order(a, b));
                found.truncate(k);
                if found.len() == k || r >= full {
                    return found.into_iter().map(|(i, d2)| (i, d2.sqrt())).collect();
                }
            }
            r = (r + r).min(full);
        }
    }

    fn knn_order(&self, a: &(usize, T), b: &(usize, T)) -> Ordering {
        a.1.partial_cmp(&b.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.pts[a.0].lex_cmp(&self.pts[b.0]))
    }
}
