//! Mixed-moment estimation for ξ-weighted measures: m₁, the radial m₂ profile,
//! the plug-in limit variances and the factorization diagnostic.

use crate::geometry::{GeometryError, Point, SpatialIndex, Window};
use crate::processes::PointConfiguration;
use crate::scalar::Real;
use crate::scores::{buffered_scores, ScoreError, ScoreFunction};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentsError {
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("need at least {need} replicates, got {got}")]
    InsufficientReplicates { got: usize, need: usize },
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("replicates use different windows")]
    WindowMismatch,
    #[error(
        "m2 profile has not converged at S = {s_max}: tail mean {tail:e} vs tolerance {tol:e}"
    )]
    ProfileTooShort { s_max: f64, tail: f64, tol: f64 },
}

pub const MIN_REPLICATES: usize = 30;

/// Window points and their buffered scores for one replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSample {
    pub points: Vec<Point<f64>>,
    pub scores: Vec<f64>,
    pub window: Window<f64>,
    pub overruns: usize,
}

impl ScoredSample {
    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.scores.iter().map(|v| v * v).sum()
    }
}

pub fn score_samples<T: Real, S: ScoreFunction<T> + ?Sized>(
    score: &S,
    configs: &[PointConfiguration<T>],
    rho_max: T,
) -> Result<Vec<ScoredSample>, MomentsError> {
    let first = configs.first().map(|c| *c.window());
    if configs.iter().any(|c| Some(*c.window()) != first) {
        return Err(MomentsError::WindowMismatch);
    }
    configs
        .par_iter()
        .map(|c| {
            let (b, vals) = buffered_scores(score, c, rho_max)?;
            let ids = c.window_indices();
            let w = c.window();
            Ok(ScoredSample {
                points: ids.iter().map(|&i| c.points()[i].cast()).collect(),
                scores: vals.into_iter().map(|v| v.f64()).collect(),
                window: Window::new(w.volume().f64(), w.dim())?,
                overruns: b.overruns,
            })
        })
        .collect()
}

/// Mean with its standard error across replicates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_values(v: &[f64]) -> Self {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 {
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            f64::NAN
        };
        Estimate {
            value: m,
            stderr: (var / n).sqrt(),
        }
    }
}

fn need(samples: &[ScoredSample]) -> Result<(), MomentsError> {
    if samples.len() < MIN_REPLICATES {
        return Err(MomentsError::InsufficientReplicates {
            got: samples.len(),
            need: MIN_REPLICATES,
        });
    }
    Ok(())
}

/// m₁ = E₀ξ(0,P)ρ⁽¹⁾ as the replicate mean of Ĥ/n.
pub fn m1_from_samples(samples: &[ScoredSample]) -> Result<Estimate, MomentsError> {
    need(samples)?;
    let v: Vec<f64> = samples
        .iter()
        .map(|s| s.total() / s.window.volume())
        .collect();
    Ok(Estimate::from_values(&v))
}

pub fn estimate_m1<T: Real, S: ScoreFunction<T> + ?Sized>(
    score: &S,
    configs: &[PointConfiguration<T>],
    rho_max: T,
) -> Result<Estimate, MomentsError> {
    m1_from_samples(&score_samples(score, configs, rho_max)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialBin {
    pub s_lo: f64,
    pub s_mid: f64,
    /// m₂ at |x| in [s_lo, s_lo + Δ).
    pub m2: f64,
    pub stderr: f64,
    /// Ordered pairs that fell in the bin, over all replicates.
    pub count: u64,
    /// Exact shell volume ω_d((s+Δ)^d − s^d).
    pub shell_volume: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentEstimate {
    pub d: usize,
    pub window_volume: f64,
    pub replicates: usize,
    pub delta: f64,
    pub s_max: f64,
    pub m1: Estimate,
    /// E₀ξ²(0,P)ρ⁽¹⁾ from Σξ²/n.
    pub second: Estimate,
    pub bins: Vec<RadialBin>,
    /// Per-replicate (Σξ²/n, Σ_b m₂_b V_b): used for the plug-in error bars.
    per_replicate: Vec<(f64, f64)>,
    pub overruns: usize,
}

fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        _ => 4.0 * PI / 3.0,
    }
}

/// ∫ over the shell [s, s+Δ) of γ(x) = Σ|x_i|.
fn shell_gamma(d: usize, s: f64, delta: f64) -> f64 {
    let t = s + delta;
    match d {
        1 => t * t - s * s,
        2 => 8.0 * (t.powi(3) - s.powi(3)) / 3.0,
        _ => 6.0 * PI * (t.powi(4) - s.powi(4)) / 4.0,
    }
}

/// Radial m₂ profile with translation edge correction 1/Vol(W ∩ (W − z)).
pub fn m2_from_samples(
    samples: &[ScoredSample],
    delta: f64,
    s_max: f64,
) -> Result<MomentEstimate, MomentsError> {
    need(samples)?;
    if !(delta > 0.0 && s_max > delta) {
        return Err(MomentsError::InvalidBinning(format!(
            "Δ = {delta}, S = {s_max}"
        )));
    }
    let w = samples[0].window;
    let d = w.dim();
    if s_max >= w.side() {
        return Err(MomentsError::InvalidBinning(format!(
            "S = {s_max} reaches across the window"
        )));
    }
    let nb = (s_max / delta).ceil() as usize;
    let omega = unit_ball_volume(d);
    let shells: Vec<f64> = (0..nb)
        .map(|b| {
            omega * (((b + 1) as f64 * delta).powi(d as i32) - (b as f64 * delta).powi(d as i32))
        })
        .collect();
    let hists: Vec<(Vec<f64>, Vec<u64>)> = samples
        .par_iter()
        .map(|s| {
            let mut sum = vec![0.0; nb];
            let mut cnt = vec![0u64; nb];
            let idx = SpatialIndex::build(&s.points, s_max.min(w.side()) / 2.0);
            let reach = nb as f64 * delta;
            for (i, x) in s.points.iter().enumerate() {
                idx.for_each_within(x, reach, |j, d2| {
                    let b = (d2.sqrt() / delta) as usize;
                    if b < nb {
                        let z = *x - *idx.point(j);
                        sum[b] += s.scores[i] * s.scores[j] / w.set_covariance(&z);
                        cnt[b] += 1;
                    }
                });
            }
            (sum, cnt)
        })
        .collect();
    let mut bins = Vec::with_capacity(nb);
    for b in 0..nb {
        let vals: Vec<f64> = hists.iter().map(|(h, _)| h[b] / shells[b]).collect();
        let e = Estimate::from_values(&vals);
        let s_lo = b as f64 * delta;
        bins.push(RadialBin {
            s_lo,
            s_mid: s_lo + delta / 2.0,
            m2: e.value,
            stderr: e.stderr,
            count: hists.iter().map(|(_, c)| c[b]).sum(),
            shell_volume: shells[b],
        });
    }
    let per_replicate: Vec<(f64, f64)> = samples
        .iter()
        .zip(&hists)
        .map(|(s, (h, _))| (s.sum_sq() / s.window.volume(), h.iter().sum()))
        .collect();
    let second = Estimate::from_values(&per_replicate.iter().map(|p| p.0).collect::<Vec<_>>());
    Ok(MomentEstimate {
        d,
        window_volume: w.volume(),
        replicates: samples.len(),
        delta,
        s_max: nb as f64 * delta,
        m1: m1_from_samples(samples)?,
        second,
        bins,
        per_replicate,
        overruns: samples.iter().map(|s| s.overruns).sum(),
    })
}

pub fn estimate_m2_radial<T: Real, S: ScoreFunction<T> + ?Sized>(
    score: &S,
    configs: &[PointConfiguration<T>],
    rho_max: T,
    delta: f64,
    s_max: f64,
) -> Result<MomentEstimate, MomentsError> {
    m2_from_samples(&score_samples(score, configs, rho_max)?, delta, s_max)
}

impl MomentEstimate {
    pub fn empty_bins(&self) -> Vec<usize> {
        (0..self.bins.len())
            .filter(|&b| self.bins[b].count == 0)
            .collect()
    }

    /// Mean of m₂ − m₁² over the outer quarter of the profile, with its error.
    pub fn tail(&self) -> Estimate {
        let start = self.bins.len() - (self.bins.len() / 4).max(1);
        let m1sq = self.m1.value * self.m1.value;
        let tail = &self.bins[start..];
        let k = tail.len() as f64;
        let value = tail.iter().map(|b| b.m2 - m1sq).sum::<f64>() / k;
        let stderr = (tail.iter().map(|b| b.stderr * b.stderr).sum::<f64>()).sqrt() / k;
        Estimate { value, stderr }
    }

    /// Checks |tail| ≤ max(tol·m₁², 3 SE).
    pub fn check_converged(&self, tol: f64) -> Result<(), MomentsError> {
        let t = self.tail();
        let bound = (tol * self.m1.value * self.m1.value).max(3.0 * t.stderr);
        if t.value.abs() > bound {
            return Err(MomentsError::ProfileTooShort {
                s_max: self.s_max,
                tail: t.value,
                tol: bound,
            });
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s_mid", "m2", "stderr", "count"])?;
        for b in &self.bins {
            w.write_record([
                format!("{:.17e}", b.s_mid),
                format!("{:.17e}", b.m2),
                format!("{:.17e}", b.stderr),
                b.count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// σ²(ξ) = E₀ξ²ρ + ∫(m₂ − m₁²), the integral as a shell sum truncated at S.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaSq {
    pub value: f64,
    pub stderr: f64,
    /// Tail mean of m₂ − m₁² with its error, for judging truncation.
    pub tail: Estimate,
}

pub const DEFAULT_TAIL_TOLERANCE: f64 = 0.05;

pub fn sigma_sq_plugin(est: &MomentEstimate) -> Result<SigmaSq, MomentsError> {
    est.check_converged(DEFAULT_TAIL_TOLERANCE)?;
    let m1sq = est.m1.value * est.m1.value;
    let vol: f64 = est.bins.iter().map(|b| b.shell_volume).sum();
    let per: Vec<f64> = est
        .per_replicate
        .iter()
        .map(|&(sq, int)| sq + int - m1sq * vol)
        .collect();
    let e = Estimate::from_values(&per);
    Ok(SigmaSq {
        value: e.value,
        stderr: e.stderr,
        tail: est.tail(),
    })
}

/// σ²(ξ,γ) = ∫(m₁² − m₂)γ with γ(x) = Σ|x_i| integrated exactly over each shell.
pub fn sigma_sq_surface(est: &MomentEstimate) -> Result<SigmaSq, MomentsError> {
    est.check_converged(DEFAULT_TAIL_TOLERANCE)?;
    let m1sq = est.m1.value * est.m1.value;
    let weights: Vec<f64> = est
        .bins
        .iter()
        .map(|b| shell_gamma(est.d, b.s_lo, est.delta) / b.shell_volume)
        .collect();
    let value = est
        .bins
        .iter()
        .zip(&weights)
        .map(|(b, w)| (m1sq - b.m2) * b.shell_volume * w)
        .sum();
    let var: f64 = est
        .bins
        .iter()
        .zip(&weights)
        .map(|(b, w)| (b.stderr * b.shell_volume * w).powi(2))
        .sum();
    Ok(SigmaSq {
        value,
        stderr: var.sqrt(),
        tail: est.tail(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorizationPoint {
    pub s: f64,
    pub error: f64,
    pub stderr: f64,
    /// Smallest non-increasing envelope over this and all larger separations.
    pub envelope: f64,
}

/// |m₂(s) − m₁²| at the bins holding the requested separations.
pub fn factorization_error_curve(
    est: &MomentEstimate,
    separations: &[f64],
) -> Vec<FactorizationPoint> {
    let m1sq = est.m1.value * est.m1.value;
    let mut pts: Vec<FactorizationPoint> = separations
        .iter()
        .filter_map(|&s| {
            let b = (s / est.delta) as usize;
            est.bins.get(b).map(|bin| FactorizationPoint {
                s,
                error: (bin.m2 - m1sq).abs(),
                stderr: (bin.stderr.powi(2) + (2.0 * est.m1.value * est.m1.stderr).powi(2)).sqrt(),
                envelope: 0.0,
            })
        })
        .collect();
    let mut run = 0.0f64;
    for p in pts.iter_mut().rev() {
        run = run.max(p.error);
        p.envelope = run;
    }
    pts
}

#[cfg(test)]
mod tests;
