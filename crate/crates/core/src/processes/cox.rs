use super::simple::poisson_count;
use super::{
    assemble, uniform_in_cube, GaussianKernel, PointConfiguration, ProcessError, Provenance,
    RngStream,
};
use crate::geometry::Window;
use crate::scalar::Real;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

/// Two independent stationary Gaussian fields on a regular grid, obtained from
/// one complex circulant embedding (real and imaginary parts).
struct GridField {
    origin: f64,
    step: f64,
    nodes: usize,
    d: usize,
    /// Z₁² + Z₂² at the nodes, row-major (x fastest).
    intensity: Vec<f64>,
}

impl GridField {
    fn sample<R: Rng>(
        half: f64,
        d: usize,
        cov: impl Fn(f64) -> f64,
        ell: f64,
        step: f64,
        rng: &mut R,
    ) -> Result<Self, ProcessError> {
        let nodes = (2.0 * half / step).ceil() as usize + 1;
        let pad = (10.0 * ell / step).ceil() as usize;
        let m = (nodes + pad).max(2);
        let total = m.pow(d as u32);
        let wrap = |k: usize| k.min(m - k) as f64 * step;
        let mut lam: Vec<Complex64> = (0..total)
            .map(|idx| {
                let (i, j) = (idx % m, idx / m);
                let s = if d == 1 {
                    wrap(i)
                } else {
                    wrap(i).hypot(wrap(j))
                };
                Complex64::new(cov(s), 0.0)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        fft_nd(&mut lam, m, d, &*fft);
        let max = lam.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let min = lam.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min < -1e-8 * max {
            return Err(ProcessError::NonEmbeddable(format!(
                "eigenvalue {min:e} against max {max:e}"
            )));
        }
        let norm = total as f64;
        let mut y: Vec<Complex64> = lam
            .iter()
            .map(|l| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(a, b) * (l.re.max(0.0) / norm).sqrt()
            })
            .collect();
        fft_nd(&mut y, m, d, &*fft);
        let mut intensity = Vec::with_capacity(nodes.pow(d as u32));
        if d == 1 {
            intensity.extend(y[..nodes].iter().map(|z| z.norm_sqr()));
        } else {
            for j in 0..nodes {
                intensity.extend(y[j * m..j * m + nodes].iter().map(|z| z.norm_sqr()));
            }
        }
        Ok(GridField {
            origin: -half,
            step,
            nodes,
            d,
            intensity,
        })
    }

    fn max(&self) -> f64 {
        self.intensity.iter().cloned().fold(0.0, f64::max)
    }

    /// Multilinear interpolation of the node intensities.
    fn at(&self, c: &[f64; 3]) -> f64 {
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for k in 0..self.d {
            let t = ((c[k] - self.origin) / self.step).clamp(0.0, (self.nodes - 1) as f64);
            let i = (t.floor() as usize).min(self.nodes - 2);
            base[k] = i;
            frac[k] = t - i as f64;
        }
        let node = |i: usize, j: usize| self.intensity[i + j * self.nodes];
        if self.d == 1 {
            node(base[0], 0) * (1.0 - frac[0]) + node(base[0] + 1, 0) * frac[0]
        } else {
            let (i, j, u, v) = (base[0], base[1], frac[0], frac[1]);
            node(i, j) * (1.0 - u) * (1.0 - v)
                + node(i + 1, j) * u * (1.0 - v)
                + node(i, j + 1) * (1.0 - u) * v
                + node(i + 1, j + 1) * u * v
        }
    }
}

fn fft_nd(data: &mut [Complex64], m: usize, d: usize, fft: &dyn rustfft::Fft<f64>) {
    for row in data.chunks_mut(m) {
        fft.process(row);
    }
    if d == 2 {
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            for j in 0..m {
                col[j] = data[i + j * m];
            }
            fft.process(&mut col);
            for j in 0..m {
                data[i + j * m] = col[j];
            }
        }
    }
}

fn cox_coords<R: Rng>(
    half: f64,
    d: usize,
    kernel: &GaussianKernel,
    scale: f64,
    step: f64,
    rng: &mut R,
) -> Result<Vec<[f64; 3]>, ProcessError> {
    let (a, ell) = (kernel.amplitude * scale, kernel.ell);
    let field = GridField::sample(
        half,
        d,
        |s| 0.5 * a * (-s * s / (2.0 * ell * ell)).exp(),
        ell,
        step,
        rng,
    )?;
    let top = field.max();
    let n = poisson_count(rng, top * (2.0 * half).powi(d as i32))?;
    let mut out = Vec::new();
    for _ in 0..n {
        let c = uniform_in_cube(rng, half, d);
        if rng.gen::<f64>() * top < field.at(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

fn check(window_d: usize, kernel: &GaussianKernel, step: f64) -> Result<(), ProcessError> {
    if !(1..=2).contains(&window_d) {
        return Err(ProcessError::InvalidParameter(
            "permanental sampler supports d = 1, 2".into(),
        ));
    }
    if !(kernel.amplitude > 0.0 && kernel.ell > 0.0) {
        return Err(ProcessError::InvalidParameter(
            "kernel amplitude and length must be positive".into(),
        ));
    }
    if !(step > 0.0 && step <= kernel.ell / 8.0 * (1.0 + 1e-12)) {
        return Err(ProcessError::InvalidParameter(format!(
            "grid step {step} must lie in (0, ℓ/8]"
        )));
    }
    Ok(())
}

/// Permanental process with Gaussian kernel K, sampled as a Cox process
/// directed by Z₁² + Z₂², the Z_i iid with covariance K/2. `step` defaults to ℓ/8.
pub fn sample_permanental_cox<T: Real>(
    window: &Window<T>,
    margin: T,
    kernel: &GaussianKernel,
    step: Option<f64>,
    stream: RngStream,
) -> Result<PointConfiguration<T>, ProcessError> {
    let step = step.unwrap_or(kernel.ell / 8.0);
    check(window.dim(), kernel, step)?;
    let half = (window.half_side() + margin).f64();
    let mut rng = stream.rng();
    let coords = cox_coords(half, window.dim(), kernel, 1.0, step, &mut rng)?;
    let prov = Provenance::new(
        "permanental",
        &[
            ("amplitude", kernel.amplitude),
            ("ell", kernel.ell),
            ("step", step),
        ],
        stream,
    );
    assemble(coords, window, margin, prov)
}

/// α-permanental process with α = 1/m: m iid permanental samples with kernel K/m.
pub fn sample_alpha_permanental<T: Real>(
    window: &Window<T>,
    margin: T,
    kernel: &GaussianKernel,
    m: usize,
    step: Option<f64>,
    stream: RngStream,
) -> Result<PointConfiguration<T>, ProcessError> {
    if m == 0 {
        return Err(ProcessError::InvalidParameter(
            "m must be at least 1".into(),
        ));
    }
    let step = step.unwrap_or(kernel.ell / 8.0);
    check(window.dim(), kernel, step)?;
    let half = (window.half_side() + margin).f64();
    let mut coords = Vec::new();
    for j in 0..m {
        let mut rng = stream.child(j as u64).rng();
        coords.extend(cox_coords(
            half,
            window.dim(),
            kernel,
            1.0 / m as f64,
            step,
            &mut rng,
        )?);
    }
    let prov = Provenance::new(
        "alpha_permanental",
        &[
            ("amplitude", kernel.amplitude),
            ("ell", kernel.ell),
            ("m", m as f64),
            ("step", step),
        ],
        stream,
    );
    assemble(coords, window, margin, prov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpatialIndex;
    use std::f64::consts::PI;

    #[test]
    fn field_covariance_matches() {
        // empirical E[Z₁(0)Z₁(s)] on the grid against C(s) = e^{−s²/2}/2
        let mut rng = RngStream::new(2, 0).rng();
        let cov = |s: f64| 0.5 * (-s * s / 2.0).exp();
        let (mut c0, mut c1) = (0.0, 0.0);
        let reps = 400;
        for _ in 0..reps {
            let f = GridField::sample(2.0, 2, cov, 1.0, 0.125, &mut rng).unwrap();
            // mean of Z₁²+Z₂² is 2C(0)
            c0 += f.intensity.iter().sum::<f64>() / f.intensity.len() as f64;
            c1 += f.max();
        }
        let m = c0 / reps as f64;
        assert!((m - 1.0).abs() < 0.05, "{m}");
        assert!(c1 / reps as f64 > 1.0);
    }

    #[test]
    fn non_embeddable_and_step_guard() {
        let mut rng = RngStream::new(2, 0).rng();
        // a box-shaped "covariance" is not positive definite
        let bad = |s: f64| if s < 1.0 { 1.0 } else { 0.0 };
        assert!(matches!(
            GridField::sample(2.0, 2, bad, 1.0, 0.1, &mut rng),
            Err(ProcessError::NonEmbeddable(_))
        ));
        let w = Window::new(4.0, 2).unwrap();
        let k = GaussianKernel {
            amplitude: 1.0,
            ell: 1.0,
        };
        assert!(sample_permanental_cox(&w, 0.0, &k, Some(0.5), RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn intensity_and_clumping() {
        let w = Window::new(400.0, 2).unwrap();
        let k = GaussianKernel {
            amplitude: 1.0,
            ell: 1.0,
        };
        let eps: f64 = 0.15;
        let reps = 150;
        let (mut n, mut pairs, mut expect) = (0.0, 0.0, 0.0);
        for i in 0..reps {
            let c = sample_permanental_cox(&w, 0.0, &k, None, RngStream::new(21, i)).unwrap();
            n += c.len() as f64;
            let idx = SpatialIndex::build(c.points(), eps);
            for p in c.points() {
                idx.for_each_within(p, eps, |_, _| pairs += 1.0);
            }
            // ordered pairs under independence, with edge correction ignored (ε ≪ side)
            expect += c.len() as f64 * (c.len() as f64 - 1.0) / 400.0 * PI * eps * eps;
        }
        let m = n / (reps as f64 * 400.0);
        assert!((m - 1.0).abs() < 0.05, "{m}");
        // g(s) = 1 + e^{−s²/ℓ²}; its average over the ε-disk is ≈ 1.989
        let g = pairs / expect;
        assert!((g - 1.989).abs() < 0.15, "{g}");
    }

    #[test]
    fn alpha_permanental_intensity() {
        let w = Window::new(100.0, 2).unwrap();
        let k = GaussianKernel {
            amplitude: 2.0,
            ell: 0.8,
        };
        let reps = 150;
        let mut n = 0.0;
        for i in 0..reps {
            n += sample_alpha_permanental(&w, 0.0, &k, 2, None, RngStream::new(31, i))
                .unwrap()
                .len() as f64;
        }
        let m = n / (reps as f64 * 100.0);
        assert!((m - 2.0).abs() < 0.1, "{m}");
    }

    #[test]
    fn one_dimensional() {
        let w = Window::new(200.0, 1).unwrap();
        let k = GaussianKernel {
            amplitude: 1.5,
            ell: 1.0,
        };
        let mut n = 0.0;
        for i in 0..200 {
            n += sample_permanental_cox(&w, 0.0, &k, None, RngStream::new(41, i))
                .unwrap()
                .len() as f64;
        }
        let m = n / (200.0 * 200.0);
        assert!((m - 1.5).abs() < 0.075, "{m}");
    }
}
