use super::{difference_kernel, FmeError, UStatistic};
use crate::geometry::{Point, Window};
use crate::moments::Estimate;
use crate::processes::{ProcessSpec, RngStream};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

/// ψ(μ) = Π_i ξ(x_i, μ + Σ_j δ_{x_j})^{k_i}: the Palm moment integrand of a
/// U-statistic score at the anchors x₁..x_p.
#[derive(Clone, Debug)]
pub struct PalmProduct {
    pub stat: UStatistic,
    pub anchors: Vec<Point<f64>>,
    pub exponents: Vec<u32>,
}

impl PalmProduct {
    pub fn new(
        stat: UStatistic,
        anchors: Vec<Point<f64>>,
        exponents: Vec<u32>,
    ) -> Result<Self, FmeError> {
        if anchors.is_empty() || anchors.len() != exponents.len() {
            return Err(FmeError::InvalidParameter("one exponent per anchor".into()));
        }
        Ok(PalmProduct {
            stat,
            anchors,
            exponents,
        })
    }

    pub fn psi(&self, mu: &[Point<f64>]) -> f64 {
        let mut all = mu.to_vec();
        all.extend_from_slice(&self.anchors);
        self.anchors
            .iter()
            .zip(&self.exponents)
            .map(|(x, &k)| self.stat.score(x, &all).powi(k as i32))
            .product()
    }

    /// (k − 1)·Σk_i: beyond this order every difference kernel vanishes.
    pub fn fme_order(&self) -> usize {
        (self.stat.order() - 1) * self.exponents.iter().map(|&k| k as usize).sum::<usize>()
    }

    /// Bounding box of ∪ B_reach(x_i) clipped to the window; D^l vanishes
    /// once any argument leaves the union.
    fn support(&self, window: &Window<f64>) -> (Vec<f64>, Vec<f64>) {
        let d = window.dim();
        let h = window.half_side();
        let r = self.stat.reach();
        let lo = (0..d).map(|i| {
            self.anchors
                .iter()
                .map(|x| x.coord(i) - r)
                .fold(f64::INFINITY, f64::min)
                .max(-h)
        });
        let hi = (0..d).map(|i| {
            self.anchors
                .iter()
                .map(|x| x.coord(i) + r)
                .fold(f64::NEG_INFINITY, f64::max)
                .min(h)
        });
        (lo.collect(), hi.collect())
    }
}

pub const MAX_FME_VOLUME: f64 = 4.0;
pub const MAX_FME_INTENSITY: f64 = 5.0;
const BLOCK: usize = 1024;

#[derive(Clone, Debug, PartialEq)]
pub struct FmeComparison {
    pub order: usize,
    /// (λ|B|)^l/l!·E D^l over uniform arguments in the support box B.
    pub terms: Vec<Estimate>,
    pub fme: Estimate,
    /// Palm Monte Carlo with the anchors added to a Poisson sample.
    pub direct: Estimate,
    /// Per-sample fme − direct under common random numbers.
    pub difference: Estimate,
}

impl FmeComparison {
    pub fn relative_gap(&self) -> f64 {
        (self.fme.value - self.direct.value).abs() / self.direct.value.abs()
    }
}

fn uniform_in(rng: &mut impl Rng, lo: &[f64], hi: &[f64]) -> Point<f64> {
    let c: Vec<f64> = lo
        .iter()
        .zip(hi)
        .map(|(&a, &b)| rng.gen_range(a..b))
        .collect();
    Point::from_f64(&c).expect("dimension checked by the window")
}

/// Truncated FME Σ_{l≤L} (λ^l/l!) ∫ D^l ψ(o) dy against the direct Palm
/// estimate E ψ(P), both from the same uniform draws. Each sample takes a
/// Poisson count N in the support box B and uniform points u₁, u₂, ..; the
/// direct side uses u₁..u_N plus an independent Poisson sample on W \ B, the
/// expansion uses u₁..u_L.
pub fn fme_truncated_expectation(
    product: &PalmProduct,
    process: &ProcessSpec,
    window: &Window<f64>,
    samples: usize,
    seed: u64,
) -> Result<FmeComparison, FmeError> {
    let lambda = match process {
        ProcessSpec::Poisson { intensity } => *intensity,
        other => return Err(FmeError::NonPoisson(other.name().to_string())),
    };
    if window.volume() > MAX_FME_VOLUME || !(lambda > 0.0 && lambda <= MAX_FME_INTENSITY) {
        return Err(FmeError::InvalidParameter(format!(
            "needs window volume ≤ {MAX_FME_VOLUME} and 0 < λ ≤ {MAX_FME_INTENSITY}, got {} and {lambda}",
            window.volume()
        )));
    }
    if samples < 2
        || product
            .anchors
            .iter()
            .any(|x| x.dim() != window.dim() || !window.contains(x))
    {
        return Err(FmeError::InvalidParameter(
            "anchors must lie in the window; need ≥ 2 samples".into(),
        ));
    }
    let big_l = product.fme_order();
    let (lo, hi) = product.support(window);
    let vol_b: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let vol_out = (window.volume() - vol_b).max(0.0);
    let h = window.half_side();
    let blocks = samples.div_ceil(BLOCK);
    let rows: Vec<Vec<(Vec<f64>, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = RngStream::new(seed, b as u64).rng();
            let n_here = BLOCK.min(samples - b * BLOCK);
            let inner = if vol_b > 0.0 {
                Some(
                    Poisson::new(lambda * vol_b)
                        .map_err(|e| FmeError::InvalidParameter(e.to_string()))?,
                )
            } else {
                None
            };
            let outer = if vol_out > 0.0 {
                Some(
                    Poisson::new(lambda * vol_out)
                        .map_err(|e| FmeError::InvalidParameter(e.to_string()))?,
                )
            } else {
                None
            };
            let mut out = Vec::with_capacity(n_here);
            for _ in 0..n_here {
                let n_in = inner.as_ref().map_or(0, |p| p.sample(&mut rng) as usize);
                let u: Vec<Point<f64>> = (0..n_in.max(big_l))
                    .map(|_| uniform_in(&mut rng, &lo, &hi))
                    .collect();
                let mut cfg: Vec<Point<f64>> = u[..n_in].to_vec();
                if let Some(o) = &outer {
                    let n_out = o.sample(&mut rng) as usize;
                    let full_lo = vec![-h; window.dim()];
                    let full_hi = vec![h; window.dim()];
                    while cfg.len() < n_in + n_out {
                        let p = uniform_in(&mut rng, &full_lo, &full_hi);
                        if (0..window.dim()).any(|i| p.coord(i) < lo[i] || p.coord(i) > hi[i]) {
                            cfg.push(p);
                        }
                    }
                }
                let direct = product.psi(&cfg);
                let mut terms = Vec::with_capacity(big_l + 1);
                let mut coef = 1.0;
                for l in 0..=big_l {
                    if l > 0 {
                        coef *= lambda * vol_b / l as f64;
                    }
                    terms.push(coef * difference_kernel(|m| product.psi(m), &u[..l], &[])?);
                }
                out.push((terms, direct));
            }
            Ok(out)
        })
        .collect::<Result<_, FmeError>>()?;
    let rows: Vec<(Vec<f64>, f64)> = rows.into_iter().flatten().collect();
    let terms = (0..=big_l)
        .map(|l| Estimate::from_values(&rows.iter().map(|r| r.0[l]).collect::<Vec<_>>()))
        .collect();
    let fme_vals: Vec<f64> = rows.iter().map(|r| r.0.iter().sum()).collect();
    let direct_vals: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let diff: Vec<f64> = fme_vals
        .iter()
        .zip(&direct_vals)
        .map(|(a, b)| a - b)
        .collect();
    Ok(FmeComparison {
        order: big_l,
        terms,
        fme: Estimate::from_values(&fme_vals),
        direct: Estimate::from_values(&direct_vals),
        difference: Estimate::from_values(&diff),
    })
}
