use super::linalg::hessenberg_eigenvalues;
use super::{assemble, PointConfiguration, ProcessError, Provenance, RngStream};
use crate::geometry::Window;
use crate::scalar::Real;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const DEFAULT_MAX_GINIBRE_N: usize = 2048;

/// Matrix size ⌈(R + 4)²⌉ for a cube of the given half-side, R being the cube's
/// circumradius in eigenvalue units (sampler units times √π).
pub fn ginibre_matrix_size(half_side: f64, d: usize) -> usize {
    let r = half_side * (d as f64).sqrt() * PI.sqrt();
    (r + 4.0).powi(2).ceil() as usize
}

fn cn01<R: Rng>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * FRAC_1_SQRT_2
}

/// Eigenvalues of an n×n matrix with iid standard complex Gaussian entries.
/// The matrix is drawn directly in its unitarily equivalent Hessenberg form:
/// iid entries on and above the diagonal, sub-diagonal √Γ(n−1−j, 1).
pub fn sample_ginibre_eigenvalues<R: Rng>(
    n: usize,
    rng: &mut R,
) -> Result<Vec<Complex64>, ProcessError> {
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..=j {
            h[i + j * n] = cn01(rng);
        }
        if j + 1 < n {
            let g = Gamma::new((n - 1 - j) as f64, 1.0)
                .map_err(|e| ProcessError::Numeric(e.to_string()))?;
            h[j + 1 + j * n] = Complex64::new(g.sample(rng).sqrt(), 0.0);
        }
    }
    hessenberg_eigenvalues(&mut h, n)
}

fn check_size(half: f64, d: usize, max_n: usize) -> Result<usize, ProcessError> {
    if d != 2 {
        return Err(ProcessError::InvalidParameter(
            "Ginibre sampling needs d = 2".into(),
        ));
    }
    let n = ginibre_matrix_size(half, d);
    if n > max_n {
        return Err(ProcessError::WindowTooLarge {
            required: n,
            max: max_n,
        });
    }
    Ok(n)
}

/// Infinite Ginibre process in intensity-one coordinates, restricted to the
/// window enlarged by `margin`.
pub fn sample_ginibre<T: Real>(
    window: &Window<T>,
    margin: T,
    stream: RngStream,
    max_n: usize,
) -> Result<PointConfiguration<T>, ProcessError> {
    let half = (window.half_side() + margin).f64();
    let n = check_size(half, window.dim(), max_n)?;
    let mut rng = stream.rng();
    let s = 1.0 / PI.sqrt();
    let z = sample_ginibre_eigenvalues(n, &mut rng)?;
    let coords = z.into_iter().map(|z| [z.re * s, z.im * s, 0.0]);
    assemble(
        coords,
        window,
        margin,
        Provenance::new("ginibre", &[("matrix_n", n as f64)], stream),
    )
}

/// β-thinned Ginibre rescaled by √β (intensity stays one).
pub fn sample_beta_ginibre<T: Real>(
    window: &Window<T>,
    margin: T,
    beta: T,
    stream: RngStream,
    max_n: usize,
) -> Result<PointConfiguration<T>, ProcessError> {
    let b = beta.f64();
    if !(b > 0.0 && b <= 1.0) {
        return Err(ProcessError::InvalidParameter(format!(
            "β = {b} outside (0, 1]"
        )));
    }
    let half = (window.half_side() + margin).f64() / b.sqrt();
    let n = check_size(half, window.dim(), max_n)?;
    let mut rng = stream.rng();
    let s = b.sqrt() / PI.sqrt();
    let z = sample_ginibre_eigenvalues(n, &mut rng)?;
    let kept: Vec<[f64; 3]> = z
        .into_iter()
        .filter(|_| b == 1.0 || rng.gen::<f64>() < b)
        .map(|z| [z.re * s, z.im * s, 0.0])
        .collect();
    let name = if b == 1.0 { "ginibre" } else { "beta_ginibre" };
    assemble(
        kept,
        window,
        margin,
        Provenance::new(name, &[("beta", b), ("matrix_n", n as f64)], stream),
    )
}

/// α-determinantal process with α = −1/m and kernel K_Ginibre: the union of m
/// independent Ginibre samples, each thinned with retention 1/m.
pub fn sample_alpha_determinantal<T: Real>(
    window: &Window<T>,
    margin: T,
    m: usize,
    stream: RngStream,
    max_n: usize,
) -> Result<PointConfiguration<T>, ProcessError> {
    if m == 0 {
        return Err(ProcessError::InvalidParameter(
            "m must be at least 1".into(),
        ));
    }
    let half = (window.half_side() + margin).f64();
    let n = check_size(half, window.dim(), max_n)?;
    let s = 1.0 / PI.sqrt();
    let keep = 1.0 / m as f64;
    let mut coords = Vec::new();
    for j in 0..m {
        let mut rng = stream.child(j as u64).rng();
        let z = sample_ginibre_eigenvalues(n, &mut rng)?;
        coords.extend(
            z.into_iter()
                .filter(|_| m == 1 || rng.gen::<f64>() < keep)
                .map(|z| [z.re * s, z.im * s, 0.0]),
        );
    }
    assemble(
        coords,
        window,
        margin,
        Provenance::new("alpha_determinantal", &[("m", m as f64)], stream),
    )
}

/// Law of the Ginibre count in the disk of radius r (eigenvalue units):
/// Poisson-binomial with success probabilities P(Γ(i,1) ≤ r²), i = 1..truncation.
pub fn ginibre_disk_count_pmf(r: f64, truncation: usize) -> Result<Vec<f64>, ProcessError> {
    if !(r > 0.0) {
        return Err(ProcessError::InvalidParameter(
            "radius must be positive".into(),
        ));
    }
    let x = r * r;
    let lam = |i: usize| statrs::function::gamma::gamma_lr(i as f64, x);
    let mut tail = 0.0;
    let mut i = truncation + 1;
    loop {
        let l = lam(i);
        tail += l;
        if l < 1e-18 * (1.0 + tail) || i > truncation + 100_000 {
            break;
        }
        i += 1;
    }
    if tail > 1e-9 {
        return Err(ProcessError::TailTooLarge(tail));
    }
    let mut pmf = vec![0.0; truncation + 1];
    pmf[0] = 1.0;
    for i in 1..=truncation {
        let l = lam(i);
        for k in (1..=i).rev() {
            pmf[k] = pmf[k] * (1.0 - l) + pmf[k - 1] * l;
        }
        pmf[0] *= 1.0 - l;
    }
    Ok(pmf)
}
