//! Factorial moment expansions: the polar order ≺ and restriction μ|_x,
//! difference kernels D^l, U-statistic functionals and their products, and
//! the finite FME of Palm moments under Poisson input.

mod expansion;
mod truncated;
mod ustat;

pub use expansion::{
    fme_truncated_expectation, FmeComparison, PalmProduct, MAX_FME_INTENSITY, MAX_FME_VOLUME,
};
pub use truncated::Truncated;
pub use ustat::{product_expansion, UStatistic};

use crate::geometry::Point;
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FmeError {
    #[error("difference kernel of order {l} exceeds the limit {max}")]
    TooManyArguments { l: usize, max: usize },
    #[error("difference kernel arguments must be distinct")]
    DuplicateArgument,
    #[error("finite expansions are evaluated for Poisson input only, got {0}")]
    NonPoisson(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub const MAX_DIFFERENCE_ORDER: usize = 12;

fn angle(p: &Point<f64>) -> f64 {
    let y = if p.dim() > 1 { p.coord(1) } else { 0.0 };
    let a = y.atan2(p.coord(0));
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// x ≺ y: radius first, then the angle in [0, 2π) of the first two
/// coordinates, then the remaining coordinates lexicographically.
pub fn polar_cmp(a: &Point<f64>, b: &Point<f64>) -> Ordering {
    a.norm2()
        .partial_cmp(&b.norm2())
        .unwrap_or(Ordering::Equal)
        .then_with(|| angle(a).partial_cmp(&angle(b)).unwrap_or(Ordering::Equal))
        .then_with(|| a.lex_cmp(b))
}

pub fn precedes(a: &Point<f64>, b: &Point<f64>) -> bool {
    polar_cmp(a, b) == Ordering::Less
}

/// A configuration held in ≺ order.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedConfiguration {
    points: Vec<Point<f64>>,
}

impl OrderedConfiguration {
    pub fn new(mut points: Vec<Point<f64>>) -> Result<Self, FmeError> {
        points.sort_by(polar_cmp);
        if points
            .windows(2)
            .any(|w| polar_cmp(&w[0], &w[1]) != Ordering::Less)
        {
            return Err(FmeError::DuplicateArgument);
        }
        Ok(OrderedConfiguration { points })
    }

    pub fn points(&self) -> &[Point<f64>] {
        &self.points
    }

    /// μ|_x as a prefix of the ordered points.
    pub fn below(&self, x: &Point<f64>) -> &[Point<f64>] {
        let k = self.points.partition_point(|p| precedes(p, x));
        &self.points[..k]
    }
}

/// μ|_x: the points of μ strictly ≺ x, in their original order.
pub fn restrict_below(mu: &[Point<f64>], x: &Point<f64>) -> Vec<Point<f64>> {
    mu.iter().filter(|p| precedes(p, x)).copied().collect()
}

fn check_arguments(ys: &[Point<f64>]) -> Result<(), FmeError> {
    if ys.len() > MAX_DIFFERENCE_ORDER {
        return Err(FmeError::TooManyArguments {
            l: ys.len(),
            max: MAX_DIFFERENCE_ORDER,
        });
    }
    for (i, a) in ys.iter().enumerate() {
        if ys[..i].iter().any(|b| b == a) {
            return Err(FmeError::DuplicateArgument);
        }
    }
    Ok(())
}

fn base_below(mu: &[Point<f64>], ys: &[Point<f64>]) -> Vec<Point<f64>> {
    match ys.iter().min_by(|a, b| polar_cmp(a, b)) {
        Some(star) => restrict_below(mu, star),
        None => mu.to_vec(),
    }
}

/// D^l_{y₁..y_l} ψ(μ) = Σ_{J⊆[l]} (−1)^{l−|J|} ψ(μ|_{y*} + Σ_{j∈J} δ_{y_j}),
/// y* the ≺-minimum of the y's.
pub fn difference_kernel<F>(psi: F, ys: &[Point<f64>], mu: &[Point<f64>]) -> Result<f64, FmeError>
where
    F: Fn(&[Point<f64>]) -> f64,
{
    check_arguments(ys)?;
    let base = base_below(mu, ys);
    let l = ys.len();
    let mut total = 0.0;
    let mut cfg = Vec::with_capacity(base.len() + l);
    for mask in 0u32..(1 << l) {
        cfg.clear();
        cfg.extend_from_slice(&base);
        cfg.extend((0..l).filter(|j| mask & (1 << j) != 0).map(|j| ys[j]));
        let v = psi(&cfg);
        if (l - mask.count_ones() as usize) % 2 == 0 {
            total += v;
        } else {
            total -= v;
        }
    }
    Ok(total)
}

/// The same kernel as an iterated one-point difference over the ≺-sorted
/// arguments: Δ_y F(ν) = F(ν + δ_y) − F(ν), applied l times at ν = μ|_{y*}.
pub fn difference_kernel_iterated<F>(
    psi: F,
    ys: &[Point<f64>],
    mu: &[Point<f64>],
) -> Result<f64, FmeError>
where
    F: Fn(&[Point<f64>]) -> f64,
{
    check_arguments(ys)?;
    let mut sorted = ys.to_vec();
    sorted.sort_by(polar_cmp);
    let mut cfg = base_below(mu, ys);
    Ok(iterate(&psi, &sorted, &mut cfg))
}

fn iterate<F: Fn(&[Point<f64>]) -> f64>(
    psi: &F,
    ys: &[Point<f64>],
    cfg: &mut Vec<Point<f64>>,
) -> f64 {
    match ys.split_last() {
        None => psi(cfg),
        Some((y, rest)) => {
            let without = iterate(psi, rest, cfg);
            cfg.push(*y);
            let with = iterate(psi, rest, cfg);
            cfg.pop();
            with - without
        }
    }
}

/// Whether D^l_{y₁..y_l} ψ(μ) is exactly zero.
pub fn fme_vanishes<F>(psi: F, ys: &[Point<f64>], mu: &[Point<f64>]) -> Result<bool, FmeError>
where
    F: Fn(&[Point<f64>]) -> f64,
{
    Ok(difference_kernel_iterated(psi, ys, mu)? == 0.0)
}

#[cfg(test)]
mod tests;
