use super::GeometryError;
use crate::scalar::Real;
use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

/// A point in R^d, d ∈ {1,2,3}. Unused trailing coordinates are kept at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<T> {
    c: [T; 3],
    dim: u8,
}

impl<T: Real> Point<T> {
    pub fn new(coords: &[T]) -> Result<Self, GeometryError> {
        let d = coords.len();
        if !(1..=3).contains(&d) {
            return Err(GeometryError::UnsupportedDimension(d));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut c = [T::zero(); 3];
        c[..d].copy_from_slice(coords);
        Ok(Point { c, dim: d as u8 })
    }

    pub fn origin(d: usize) -> Self {
        assert!((1..=3).contains(&d), "dimension must be 1, 2 or 3");
        Point {
            c: [T::zero(); 3],
            dim: d as u8,
        }
    }

    pub fn x(x: T) -> Self {
        Point {
            c: [x, T::zero(), T::zero()],
            dim: 1,
        }
    }

    pub fn xy(x: T, y: T) -> Self {
        Point {
            c: [x, y, T::zero()],
            dim: 2,
        }
    }

    pub fn xyz(x: T, y: T, z: T) -> Self {
        Point {
            c: [x, y, z],
            dim: 3,
        }
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self, GeometryError> {
        let v: Vec<T> = coords.iter().map(|&x| T::of(x)).collect();
        Self::new(&v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.c[..self.dim as usize]
    }

    #[inline]
    pub fn raw(&self) -> &[T; 3] {
        &self.c
    }

    #[inline]
    pub fn coord(&self, i: usize) -> T {
        self.c[i]
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.c[0] * o.c[0] + self.c[1] * o.c[1] + self.c[2] * o.c[2]
    }

    #[inline]
    pub fn norm2(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm2().sqrt()
    }

    #[inline]
    pub fn dist2(&self, o: &Self) -> T {
        let a = self.c[0] - o.c[0];
        let b = self.c[1] - o.c[1];
        let c = self.c[2] - o.c[2];
        a * a + b * b + c * c
    }

    #[inline]
    pub fn dist(&self, o: &Self) -> T {
        self.dist2(o).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Point {
            c: [self.c[0] * s, self.c[1] * s, self.c[2] * s],
            dim: self.dim,
        }
    }

    pub fn cast<U: Real>(&self) -> Point<U> {
        Point {
            c: [
                U::of(self.c[0].f64()),
                U::of(self.c[1].f64()),
                U::of(self.c[2].f64()),
            ],
            dim: self.dim,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords().iter().map(|v| v.f64()).collect()
    }

    /// Lexicographic order on coordinates; total for finite points.
    pub fn lex_cmp(&self, o: &Self) -> Ordering {
        for i in 0..3 {
            match self.c[i].partial_cmp(&o.c[i]).unwrap_or(Ordering::Equal) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Point<T>;
    fn add(self, o: Self) -> Self {
        Point {
            c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2]],
            dim: self.dim.max(o.dim),
        }
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Point<T>;
    fn sub(self, o: Self) -> Self {
        Point {
            c: [self.c[0] - o.c[0], self.c[1] - o.c[1], self.c[2] - o.c[2]],
            dim: self.dim.max(o.dim),
        }
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Point<T>;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}
