use super::{GeometryError, Point};
use crate::scalar::Real;

/// Centered cube of volume `n` in R^d.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window<T> {
    n: T,
    d: usize,
    half: T,
}

pub fn build_window<T: Real>(n: T, d: usize) -> Result<Window<T>, GeometryError> {
    Window::new(n, d)
}

impl<T: Real> Window<T> {
    pub fn new(n: T, d: usize) -> Result<Self, GeometryError> {
        if !(1..=3).contains(&d) {
            return Err(GeometryError::UnsupportedDimension(d));
        }
        if !(n > T::zero()) || !n.is_finite() {
            return Err(GeometryError::NonPositiveVolume);
        }
        let side = match d {
            1 => n,
            2 => n.sqrt(),
            _ => n.cbrt(),
        };
        Ok(Window {
            n,
            d,
            half: side / T::of(2.0),
        })
    }

    /// Cube with the given side length (volume side^d).
    pub fn with_side(side: T, d: usize) -> Result<Self, GeometryError> {
        if !(side > T::zero()) {
            return Err(GeometryError::NonPositiveVolume);
        }
        let mut w = Self::new(side.powi(d as i32), d)?;
        w.half = side / T::of(2.0);
        Ok(w)
    }

    #[inline]
    pub fn volume(&self) -> T {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn half_side(&self) -> T {
        self.half
    }

    #[inline]
    pub fn side(&self) -> T {
        self.half + self.half
    }

    pub fn circumradius(&self) -> T {
        self.half * T::of(self.d as f64).sqrt()
    }

    /// Closed-cube membership.
    #[inline]
    pub fn contains(&self, p: &Point<T>) -> bool {
        p.coords().iter().all(|&v| v.abs() <= self.half)
    }

    /// Distance from an interior point to the cube boundary (negative outside).
    pub fn margin_of(&self, p: &Point<T>) -> T {
        p.coords()
            .iter()
            .map(|&v| self.half - v.abs())
            .fold(T::infinity(), |a, b| a.min(b))
    }

    /// The concentric cube whose faces sit `margin` further out.
    pub fn enlarged(&self, margin: T) -> Self {
        let half = self.half + margin;
        let side = half + half;
        Window {
            n: side.powi(self.d as i32),
            d: self.d,
            half,
        }
    }

    /// Vol(W ∩ (W − z)) for the cube.
    pub fn set_covariance(&self, z: &Point<T>) -> T {
        let a = self.side();
        (0..self.d).fold(T::one(), |acc, i| {
            acc * (a - z.coord(i).abs()).max(T::zero())
        })
    }

    /// γ_W(y) = Vol(W ∩ (R^d \ W − y)).
    pub fn boundary_overlap(&self, y: &Point<T>) -> T {
        (self.side().powi(self.d as i32) - self.set_covariance(y)).max(T::zero())
    }
}

pub fn boundary_overlap<T: Real>(window: &Window<T>, y: &Point<T>) -> T {
    window.boundary_overlap(y)
}

/// γ(y) = lim γ_{W_n}(y) / n^{(d-1)/d} = Σ|y_i| for centered cubes.
pub fn boundary_overlap_limit<T: Real>(y: &Point<T>) -> T {
    y.coords().iter().map(|v| v.abs()).sum()
}
