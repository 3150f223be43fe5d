use super::CumulantError;
use crate::moments::Estimate;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use std::io::Write;

/// Power sums Σx^j, j = 1..4, of data centered at a fixed shift.
#[derive(Clone, Copy, Debug)]
struct Sums {
    n: f64,
    s: [f64; 5],
}

impl Sums {
    fn of(v: &[f64], shift: f64) -> Self {
        let mut s = [0.0; 5];
        for &x in v {
            let y = x - shift;
            let mut p = 1.0;
            for sj in s.iter_mut() {
                *sj += p;
                p *= y;
            }
        }
        Sums {
            n: v.len() as f64,
            s,
        }
    }

    fn without(&self, y: f64) -> Self {
        let mut s = self.s;
        let mut p = 1.0;
        for sj in s.iter_mut() {
            *sj -= p;
            p *= y;
        }
        Sums { n: self.n - 1.0, s }
    }

    /// Unbiased k-statistic k_j of the centered data (k₁ excludes the shift).
    fn k(&self, j: usize) -> f64 {
        let n = self.n;
        let [_, s1, s2, s3, s4] = self.s;
        match j {
            1 => s1 / n,
            2 => (n * s2 - s1 * s1) / (n * (n - 1.0)),
            3 => (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0)),
            4 => {
                (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2
                    - 3.0 * n * (n - 1.0) * s2 * s2
                    - 4.0 * n * (n + 1.0) * s1 * s3
                    + n * n * (n + 1.0) * s4)
                    / (n * (n - 1.0) * (n - 2.0) * (n - 3.0))
            }
            _ => unreachable!(),
        }
    }
}

/// Jackknife over leave-one-out power sums.
fn jackknife(v: &[f64], shift: f64, stat: impl Fn(&Sums) -> f64) -> Estimate {
    let all = Sums::of(v, shift);
    let value = stat(&all);
    let loo: Vec<f64> = v.iter().map(|&x| stat(&all.without(x - shift))).collect();
    let n = v.len() as f64;
    let mean = loo.iter().sum::<f64>() / n;
    let var = (n - 1.0) / n * loo.iter().map(|t| (t - mean).powi(2)).sum::<f64>();
    Estimate {
        value,
        stderr: var.sqrt(),
    }
}

pub const MAX_KSTAT_ORDER: usize = 4;

/// k-statistics k₁..k_{k_max} with jackknife standard errors.
pub fn k_statistics(values: &[f64], k_max: usize) -> Result<Vec<Estimate>, CumulantError> {
    if k_max == 0 || k_max > MAX_KSTAT_ORDER {
        return Err(CumulantError::OrderTooLarge {
            k: k_max,
            max: MAX_KSTAT_ORDER,
        });
    }
    // leave-one-out needs n − 1 > k_max
    if values.len() < k_max + 2 {
        return Err(CumulantError::InsufficientReplicates {
            k: k_max,
            got: values.len(),
            need: k_max + 2,
        });
    }
    let shift = values.iter().sum::<f64>() / values.len() as f64;
    Ok((1..=k_max)
        .map(|j| {
            let mut e = jackknife(values, shift, |s| s.k(j));
            if j == 1 {
                e.value += shift;
            }
            e
        })
        .collect())
}

/// Replicates required before a ladder reports cumulants of order k.
pub fn required_replicates(k: usize) -> usize {
    if k >= 4 {
        2000
    } else {
        500
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderPoint {
    pub n: f64,
    pub values: Vec<f64>,
    /// S₁..S_k as k-statistics.
    pub cumulants: Vec<Estimate>,
    /// k₃/k₂^{3/2}.
    pub normalized_skewness: Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slope {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CumulantLadder {
    pub k_max: usize,
    pub points: Vec<LadderPoint>,
}

impl CumulantLadder {
    /// Builds the ladder from replicate values of μ_n^ξ(f) at each n.
    pub fn from_values(rows: Vec<(f64, Vec<f64>)>, k_max: usize) -> Result<Self, CumulantError> {
        if rows.is_empty() || rows.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(CumulantError::InvalidLadder(
                "window volumes must be strictly increasing".into(),
            ));
        }
        let need = required_replicates(k_max);
        let mut points = Vec::with_capacity(rows.len());
        for (n, values) in rows {
            if values.len() < need {
                return Err(CumulantError::InsufficientReplicates {
                    k: k_max,
                    got: values.len(),
                    need,
                });
            }
            let cumulants = k_statistics(&values, k_max)?;
            let shift = values.iter().sum::<f64>() / values.len() as f64;
            let normalized_skewness = jackknife(&values, shift, |s| s.k(3) / s.k(2).powf(1.5));
            points.push(LadderPoint {
                n,
                values,
                cumulants,
                normalized_skewness,
            });
        }
        Ok(CumulantLadder { k_max, points })
    }

    /// Evaluates `sample(n, replicate)` over the ladder in parallel; values
    /// come back in (n, replicate) order whatever the scheduling.
    pub fn estimate<F, E>(
        ladder: &[f64],
        replicates: usize,
        k_max: usize,
        sample: F,
    ) -> Result<Self, CumulantError>
    where
        F: Fn(f64, u64) -> Result<f64, E> + Sync,
        E: std::fmt::Display,
    {
        let need = required_replicates(k_max);
        if replicates < need {
            return Err(CumulantError::InsufficientReplicates {
                k: k_max,
                got: replicates,
                need,
            });
        }
        let jobs: Vec<(usize, u64)> = (0..ladder.len())
            .flat_map(|a| (0..replicates as u64).map(move |i| (a, i)))
            .collect();
        let vals: Vec<f64> = jobs
            .par_iter()
            .map(|&(a, i)| sample(ladder[a], i).map_err(|e| CumulantError::Sampling(e.to_string())))
            .collect::<Result<_, _>>()?;
        let rows = ladder
            .iter()
            .zip(vals.chunks(replicates))
            .map(|(&n, v)| (n, v.to_vec()))
            .collect();
        Self::from_values(rows, k_max)
    }

    /// Log-log slope of |S_k| against n over the first `upto` points, with the
    /// jackknife errors propagated through the least-squares weights.
    pub fn slope_through(&self, k: usize, upto: usize) -> Option<Slope> {
        let pts = &self.points[..upto.min(self.points.len())];
        if pts.len() < 2 || k == 0 || k > self.k_max {
            return None;
        }
        let ns: Vec<f64> = pts.iter().map(|p| p.n).collect();
        let ests: Vec<Estimate> = pts.iter().map(|p| p.cumulants[k - 1]).collect();
        loglog_slope(&ns, &ests)
    }

    pub fn slope(&self, k: usize) -> Option<Slope> {
        self.slope_through(k, self.points.len())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "k", "S_k", "stderr", "slope_so_far"])?;
        for (a, p) in self.points.iter().enumerate() {
            for (j, e) in p.cumulants.iter().enumerate() {
                let slope = self
                    .slope_through(j + 1, a + 1)
                    .map_or(String::new(), |s| format!("{:.17e}", s.value));
                w.write_record([
                    p.n.to_string(),
                    (j + 1).to_string(),
                    format!("{:.17e}", e.value),
                    format!("{:.17e}", e.stderr),
                    slope,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Least-squares slope of ln|y| on ln x, with the relative errors of the y
/// estimates propagated through the fit weights.
pub fn loglog_slope(xs: &[f64], ys: &[Estimate]) -> Option<Slope> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let xm = lx.iter().sum::<f64>() / lx.len() as f64;
    let sxx: f64 = lx.iter().map(|x| (x - xm).powi(2)).sum();
    let w: Vec<f64> = lx.iter().map(|x| (x - xm) / sxx).collect();
    let value = w.iter().zip(ys).map(|(w, y)| w * y.value.abs().ln()).sum();
    let var: f64 = w
        .iter()
        .zip(ys)
        .map(|(w, y)| w * w * (y.stderr / y.value).powi(2))
        .sum();
    Some(Slope {
        value,
        stderr: var.sqrt(),
    })
}

pub const MIN_CLT_REPLICATES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CltReport {
    pub replicates: usize,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_distance: f64,
    pub ks_p_value: f64,
}

/// Standardizes by the sample mean and SD, then reports moment shape and the
/// Kolmogorov–Smirnov distance to N(0,1).
pub fn clt_diagnostics(values: &[f64]) -> Result<CltReport, CumulantError> {
    let n = values.len();
    if n < MIN_CLT_REPLICATES {
        return Err(CumulantError::InsufficientReplicates {
            k: 2,
            got: n,
            need: MIN_CLT_REPLICATES,
        });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let m2 = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    if m2 <= 0.0 || !m2.is_finite() {
        return Err(CumulantError::Degenerate);
    }
    let sd = (m2 * nf / (nf - 1.0)).sqrt();
    let mut z: Vec<f64> = values.iter().map(|x| (x - mean) / sd).collect();
    let m3 = values.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / nf;
    let m4 = values.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let phi = Normal::standard();
    let mut d = 0.0f64;
    for (i, &x) in z.iter().enumerate() {
        let f = phi.cdf(x);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    Ok(CltReport {
        replicates: n,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        ks_distance: d,
        ks_p_value: ks_p_value(d, n),
    })
}

/// Asymptotic Kolmogorov tail P(D_n > d) with Stephens' finite-n correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    if lam < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lam * lam).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
