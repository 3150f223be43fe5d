use super::ProcessError;
use crate::geometry::Point;
use num_complex::Complex64;

/// Correlation kernel of a determinantal or permanental process.
pub trait Kernel: Send + Sync {
    fn eval(&self, x: &Point<f64>, y: &Point<f64>) -> Complex64;
    /// sup |K|.
    fn sup_norm(&self) -> f64;
    /// Decay majorant ω with |K(x,y)| ≤ ω(|x − y|).
    fn majorant(&self, s: f64) -> f64;
    fn intensity(&self) -> f64 {
        let o = Point::origin(2);
        self.eval(&o, &o).re
    }

    fn matrix(&self, pts: &[Point<f64>]) -> Vec<Vec<Complex64>> {
        pts.iter()
            .map(|x| pts.iter().map(|y| self.eval(x, y)).collect())
            .collect()
    }
}

/// K(x,y) = exp((x ȳ − (|x|² + |y|²)/2) / ℓ²) with points read as complex numbers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GinibreKernel {
    ell2: f64,
}

impl GinibreKernel {
    /// The kernel exp(z w̄) exp(−(|z|²+|w|²)/2) in its natural coordinates,
    /// where |K(z,w)|² = e^{−|z−w|²}.
    pub fn standard() -> Self {
        GinibreKernel { ell2: 1.0 }
    }

    /// Ginibre kernel in the sampler's intensity-one coordinates, |K|² = e^{−π s²}.
    pub fn unit_intensity() -> Self {
        GinibreKernel {
            ell2: 1.0 / std::f64::consts::PI,
        }
    }

    /// β-Ginibre after the √β rescale, |K|² = e^{−π s²/β}.
    pub fn beta(beta: f64) -> Self {
        GinibreKernel {
            ell2: beta / std::f64::consts::PI,
        }
    }

    pub fn length_scale_sq(&self) -> f64 {
        self.ell2
    }
}

impl Kernel for GinibreKernel {
    fn eval(&self, x: &Point<f64>, y: &Point<f64>) -> Complex64 {
        let zx = Complex64::new(x.coord(0), x.coord(1));
        let zy = Complex64::new(y.coord(0), y.coord(1));
        ((zx * zy.conj() - (zx.norm_sqr() + zy.norm_sqr()) / 2.0) / self.ell2).exp()
    }

    fn sup_norm(&self) -> f64 {
        1.0
    }

    fn majorant(&self, s: f64) -> f64 {
        (-s * s / (2.0 * self.ell2)).exp()
    }
}

/// Real Gaussian kernel K(x,y) = a·exp(−|x−y|²/(2ℓ²)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianKernel {
    pub amplitude: f64,
    pub ell: f64,
}

impl Kernel for GaussianKernel {
    fn eval(&self, x: &Point<f64>, y: &Point<f64>) -> Complex64 {
        Complex64::new(self.majorant(x.dist(y)), 0.0)
    }

    fn sup_norm(&self) -> f64 {
        self.amplitude.abs()
    }

    fn majorant(&self, s: f64) -> f64 {
        self.amplitude.abs() * (-s * s / (2.0 * self.ell * self.ell)).exp()
    }
}

pub const MAX_ALPHA_ORDER: usize = 9;

/// Σ_{π ∈ S_k} α^{k − ν(π)} Π M[i][π(i)], ν = number of cycles.
pub fn alpha_permanent(m: &[Vec<Complex64>], alpha: f64) -> Result<Complex64, ProcessError> {
    let k = m.len();
    if k > MAX_ALPHA_ORDER {
        return Err(ProcessError::TooLarge(k));
    }
    if k == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    let mut total = term(m, &perm, alpha);
    // Heap's algorithm
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += term(m, &perm, alpha);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

fn term(m: &[Vec<Complex64>], perm: &[usize], alpha: f64) -> Complex64 {
    let k = perm.len();
    let mut seen = [false; MAX_ALPHA_ORDER];
    let mut cycles = 0;
    for s in 0..k {
        if !seen[s] {
            cycles += 1;
            let mut j = s;
            while !seen[j] {
                seen[j] = true;
                j = perm[j];
            }
        }
    }
    let coef = alpha.powi((k - cycles) as i32);
    if coef == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut prod = Complex64::new(coef, 0.0);
    for (i, &j) in perm.iter().enumerate() {
        prod *= m[i][j];
    }
    prod
}

/// ρ^{(k)}(x₁..x_k) of the α-process with kernel K: the α-permanent of the
/// kernel matrix (α = −1 determinantal, +1 permanental, 0 Poisson).
pub fn correlation_alpha<K: Kernel + ?Sized>(
    kernel: &K,
    alpha: f64,
    pts: &[Point<f64>],
) -> Result<f64, ProcessError> {
    if pts.len() > MAX_ALPHA_ORDER {
        return Err(ProcessError::TooLarge(pts.len()));
    }
    Ok(alpha_permanent(&kernel.matrix(pts), alpha)?.re)
}

/// Determinant by partially pivoted LU.
pub fn determinant(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap())
            .unwrap();
        if a[piv][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[row][c] -= f * v;
            }
        }
    }
    det
}

/// Permanent by Ryser's inclusion–exclusion formula with Gray-code updates.
pub fn permanent(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut rowsum = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let next = step ^ (step >> 1);
        let flipped = (gray ^ next).trailing_zeros() as usize;
        let add = next & (1 << flipped) != 0;
        for i in 0..n {
            if add {
                rowsum[i] += m[i][flipped];
            } else {
                rowsum[i] -= m[i][flipped];
            }
        }
        gray = next;
        let prod = rowsum.iter().fold(Complex64::new(1.0, 0.0), |p, v| p * v);
        let sign = if (n - next.count_ones() as usize) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        total += prod * sign;
    }
    total
}

/// Smallest eigenvalue (real part) of the kernel matrix on `pts`; a valid
/// determinantal kernel gives a positive semidefinite matrix.
pub fn kernel_min_eigenvalue<K: Kernel + ?Sized>(
    kernel: &K,
    pts: &[Point<f64>],
) -> Result<f64, ProcessError> {
    let n = pts.len();
    let m = kernel.matrix(pts);
    let mut a: Vec<Complex64> = (0..n * n).map(|i| m[i % n][i / n]).collect();
    let w = super::linalg::eigenvalues(&mut a, n)?;
    Ok(w.iter().map(|z| z.re).fold(f64::INFINITY, f64::min))
}

/// Factorization gaps of a configuration split into two groups at distance
/// s, with the bounds n^{1+n/2}·ω(s)·‖K‖^{n−1} (determinants) and
/// n·n!·ω(s)·‖K‖^{n−1} (permanents).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitFactorization {
    pub n: usize,
    pub separation: f64,
    pub det_gap: f64,
    pub det_bound: f64,
    pub perm_gap: f64,
    pub perm_bound: f64,
}

impl SplitFactorization {
    pub fn det_holds(&self) -> bool {
        self.det_gap <= self.det_bound * (1.0 + 1e-9) + 1e-12
    }

    pub fn perm_holds(&self) -> bool {
        self.perm_gap <= self.perm_bound * (1.0 + 1e-9) + 1e-12
    }
}

pub fn split_factorization<K: Kernel + ?Sized>(
    kernel: &K,
    a: &[Point<f64>],
    b: &[Point<f64>],
) -> Result<SplitFactorization, ProcessError> {
    let n = a.len() + b.len();
    if a.is_empty() || b.is_empty() || n > MAX_ALPHA_ORDER {
        return Err(ProcessError::InvalidParameter(format!(
            "split sizes {} and {}",
            a.len(),
            b.len()
        )));
    }
    let s = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| x.dist(y)))
        .fold(f64::INFINITY, f64::min);
    let all: Vec<Point<f64>> = a.iter().chain(b).copied().collect();
    let (m0, m1, m2) = (kernel.matrix(&all), kernel.matrix(a), kernel.matrix(b));
    let scale = kernel.majorant(s) * kernel.sup_norm().powi(n as i32 - 1);
    let nf = n as f64;
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(SplitFactorization {
        n,
        separation: s,
        det_gap: (determinant(&m0) - determinant(&m1) * determinant(&m2)).norm(),
        det_bound: nf.powf(1.0 + nf / 2.0) * scale,
        perm_gap: (permanent(&m0) - permanent(&m1) * permanent(&m2)).norm(),
        perm_bound: nf * fact * scale,
    })
}

/// Correlation of the superposition of m iid copies:
/// ρ₀^{(k)}(x) = Σ over ordered m-tuples of disjoint blocks covering [k] of Π ρ(x_block).
pub fn superposition_correlation<F>(rho: F, m: usize, k: usize) -> f64
where
    F: Fn(&[usize]) -> f64,
{
    // assign each index a copy label; empty blocks contribute ρ(∅) = 1
    let mut labels = vec![0usize; k];
    let mut total = 0.0;
    loop {
        let mut prod = 1.0;
        for c in 0..m {
            let block: Vec<usize> = (0..k).filter(|&i| labels[i] == c).collect();
            if !block.is_empty() {
                prod *= rho(&block);
            }
        }
        total += prod;
        let mut i = 0;
        loop {
            if i == k {
                return total;
            }
            labels[i] += 1;
            if labels[i] < m {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}
