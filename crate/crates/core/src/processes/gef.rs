use super::linalg::eigenvalues;
use super::{assemble, PointConfiguration, ProcessError, Provenance, RngStream};
use crate::geometry::Window;
use crate::scalar::Real;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::FRAC_1_SQRT_2;

/// Smallest safe truncation degree ⌈R² + 10R + 20⌉ for zeros within radius R.
pub fn gef_truncation(radius: f64) -> usize {
    (radius * radius + 10.0 * radius + 20.0).ceil() as usize
}

/// p(w) and p'(w) by Horner, coefficients in ascending order.
fn horner(b: &[Complex64], w: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in b.iter().rev() {
        dp = dp * w + p;
        p = p * w + c;
    }
    (p, dp)
}

/// Zeros of f(z) = Σ_{j≤J} X_j z^j / √(j!) in the window enlarged by `margin`.
/// `truncation` defaults to the safe bound for the region's circumradius.
pub fn sample_gef_zeros<T: Real>(
    window: &Window<T>,
    margin: T,
    truncation: Option<usize>,
    stream: RngStream,
) -> Result<PointConfiguration<T>, ProcessError> {
    if window.dim() != 2 {
        return Err(ProcessError::InvalidParameter(
            "GEF zeros need d = 2".into(),
        ));
    }
    let region = window.enlarged(margin);
    let radius = region.circumradius().f64();
    let required = gef_truncation(radius);
    let j_max = truncation.unwrap_or(required);
    if j_max < required {
        return Err(ProcessError::TruncationTooSmall {
            given: j_max,
            required,
        });
    }
    let mut rng = stream.rng();
    // z = R w keeps the roots of interest in the unit disk; log-scale the
    // coefficients so the largest weight is one.
    let s = radius.max(1.0);
    let logw: Vec<f64> = (0..=j_max)
        .map(|j| -0.5 * ln_gamma(j as f64 + 1.0) + j as f64 * s.ln())
        .collect();
    let lmax = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let b: Vec<Complex64> = logw
        .iter()
        .map(|&l| {
            let a: f64 = rng.sample(StandardNormal);
            let c: f64 = rng.sample(StandardNormal);
            Complex64::new(a, c) * FRAC_1_SQRT_2 * (l - lmax).exp()
        })
        .collect();
    // drop trailing coefficients that underflowed; they cannot move roots in |w| ≤ 1
    let deg = b.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
    let b = &b[..=deg];
    if deg == 0 {
        return assemble(
            std::iter::empty(),
            window,
            margin,
            Provenance::new("gef", &[("truncation", j_max as f64)], stream),
        );
    }
    let n = deg;
    let mut comp = vec![Complex64::new(0.0, 0.0); n * n];
    let lead = b[n];
    for k in 0..n {
        comp[k * n] = -b[n - 1 - k] / lead;
    }
    for i in 1..n {
        comp[i + (i - 1) * n] = Complex64::new(1.0, 0.0);
    }
    let roots = eigenvalues(&mut comp, n)?;
    let rmax = region.circumradius().f64() / s;
    let mut coords = Vec::new();
    for mut w in roots {
        if !(w.norm() <= rmax * 1.01) {
            continue;
        }
        for _ in 0..3 {
            let (p, dp) = horner(b, w);
            if dp.norm() == 0.0 {
                break;
            }
            let next = w - p / dp;
            if horner(b, next).0.norm() < p.norm() {
                w = next;
            } else {
                break;
            }
        }
        let scale = b
            .iter()
            .enumerate()
            .map(|(j, c)| c.norm() * w.norm().powi(j as i32))
            .fold(0.0, f64::max);
        let (p, _) = horner(b, w);
        if p.norm() >= 1e-6 * scale {
            return Err(ProcessError::Numeric(format!(
                "GEF root residual {:e} against scale {:e}",
                p.norm(),
                scale
            )));
        }
        coords.push([w.re * s, w.im * s, 0.0]);
    }
    assemble(
        coords,
        window,
        margin,
        Provenance::new("gef", &[("truncation", j_max as f64)], stream),
    )
}
