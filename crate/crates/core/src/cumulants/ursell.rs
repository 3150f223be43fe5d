use super::{weight, CumulantError, PartitionTable};
use crate::geometry::Point;
use crate::processes::{correlation_alpha, Kernel, ProcessError};
use num_complex::Complex64;
use num_traits::{FromPrimitive, Num};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Truncated correlation m_⊤ = Σ_π w(π) Π_{B∈π} m(B) over partitions of the
/// p arguments. `oracle` receives each block as sorted argument indices and
/// returns the mixed moment density of that block; each block is asked once.
pub fn ursell_from_correlations<T, F>(p: usize, mut oracle: F) -> Result<T, CumulantError>
where
    T: Num + Clone + FromPrimitive,
    F: FnMut(&[usize]) -> T,
{
    let table = PartitionTable::new(p)?;
    let mut memo: HashMap<u32, T> = HashMap::new();
    let mut total = T::zero();
    for part in table.partitions() {
        let mut prod = T::one();
        for b in &part.blocks {
            let key = b.iter().fold(0u32, |m, &i| m | (1 << i));
            let v = memo.entry(key).or_insert_with(|| oracle(b)).clone();
            prod = prod * v;
        }
        total = total + weight::<T>(part.weight) * prod;
    }
    Ok(total)
}

/// Ursell function of ξ ≡ 1 on the α-process with kernel K: the truncation of
/// its correlation functions ρ^{(|B|)}.
pub fn ursell_alpha<K: Kernel + ?Sized>(
    kernel: &K,
    alpha: f64,
    pts: &[Point<f64>],
) -> Result<f64, CumulantError> {
    let mut err: Option<ProcessError> = None;
    let v = ursell_from_correlations(pts.len(), |b: &[usize]| {
        let sub: Vec<Point<f64>> = b.iter().map(|&i| pts[i]).collect();
        correlation_alpha(kernel, alpha, &sub).unwrap_or_else(|e| {
            err = Some(e);
            f64::NAN
        })
    })?;
    match err {
        Some(e) => Err(CumulantError::Sampling(e.to_string())),
        None => Ok(v),
    }
}

/// Closed form for determinantal input: (−1)^{p−1} Σ over cyclic
/// permutations σ of Π K(x_i, x_σ(i)).
pub fn cyclic_truncated_correlation<K: Kernel + ?Sized>(kernel: &K, pts: &[Point<f64>]) -> f64 {
    let p = pts.len();
    if p == 1 {
        return kernel.eval(&pts[0], &pts[0]).re;
    }
    let m = kernel.matrix(pts);
    // cycles through 0: fix 0 first, permute the rest
    let mut rest: Vec<usize> = (1..p).collect();
    let mut total = Complex64::new(0.0, 0.0);
    permute(&mut rest, 0, &mut |order| {
        let mut prod = Complex64::new(1.0, 0.0);
        let mut cur = 0;
        for &j in order {
            prod *= m[cur][j];
            cur = j;
        }
        total += prod * m[cur][0];
    });
    let sign = if p % 2 == 1 { 1.0 } else { -1.0 };
    sign * total.re
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPoint {
    pub diameter: f64,
    /// max |m_⊤| over the sampled configurations of this diameter.
    pub max_abs: f64,
    /// Smallest non-increasing majorant of max_abs from this diameter on.
    pub envelope: f64,
}

/// max |m_⊤| over random p-point configurations of each given diameter: two
/// points at distance D fix the diameter, the others fall uniformly in the
/// disk spanned by them, and the whole set is rotated and shifted at random.
pub fn ursell_decay_scan<K: Kernel + ?Sized>(
    kernel: &K,
    alpha: f64,
    p: usize,
    diameters: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<DecayPoint>, CumulantError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(diameters.len());
    for &d in diameters {
        let mut best = 0.0f64;
        for _ in 0..samples {
            let pts = spread_configuration(&mut rng, p, d);
            best = best.max(ursell_alpha(kernel, alpha, &pts)?.abs());
        }
        out.push(DecayPoint {
            diameter: d,
            max_abs: best,
            envelope: 0.0,
        });
    }
    let mut run = 0.0f64;
    for q in out.iter_mut().rev() {
        run = run.max(q.max_abs);
        q.envelope = run;
    }
    Ok(out)
}

fn spread_configuration(rng: &mut impl Rng, p: usize, d: f64) -> Vec<Point<f64>> {
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let (c, s) = (theta.cos(), theta.sin());
    let shift = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let mut local = vec![(-d / 2.0, 0.0), (d / 2.0, 0.0)];
    while local.len() < p {
        let (x, y): (f64, f64) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        if x * x + y * y <= 0.25 {
            local.push((x * d, y * d));
        }
    }
    local.truncate(p.max(1));
    local
        .into_iter()
        .map(|(x, y)| Point::xy(c * x - s * y + shift.0, s * x + c * y + shift.1))
        .collect()
}
