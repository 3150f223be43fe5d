//! Point-process samplers and closed-form correlation evaluators.

mod cox;
mod gef;
mod ginibre;
mod kernel;
mod linalg;
mod simple;
mod spec;

pub use cox::{sample_alpha_permanental, sample_permanental_cox};
pub use gef::{gef_truncation, sample_gef_zeros};
pub use ginibre::{
    ginibre_disk_count_pmf, ginibre_matrix_size, sample_alpha_determinantal, sample_beta_ginibre,
    sample_ginibre, sample_ginibre_eigenvalues, DEFAULT_MAX_GINIBRE_N,
};
pub use kernel::{
    alpha_permanent, correlation_alpha, determinant, kernel_min_eigenvalue, permanent,
    split_factorization, superposition_correlation, GaussianKernel, GinibreKernel, Kernel,
    SplitFactorization, MAX_ALPHA_ORDER,
};
pub use simple::{sample_matern2, sample_matern_cluster, sample_poisson};
pub use spec::{Limits, ProcessSpec};

use crate::geometry::{GeometryError, Point, Window};
use crate::scalar::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("duplicate point in configuration")]
    DuplicatePoint,
    #[error("point outside the sampled region")]
    OutsideRegion,
    #[error("window needs a {required}x{required} Ginibre matrix; configured max N is {max}")]
    WindowTooLarge { required: usize, max: usize },
    #[error("covariance not embeddable at this resolution: {0}")]
    NonEmbeddable(String),
    #[error("truncation {given} below the safe bound {required}")]
    TruncationTooSmall { given: usize, required: usize },
    #[error("tail mass {0:e} beyond truncation exceeds 1e-9")]
    TailTooLarge(f64),
    #[error("order {0} exceeds the enumeration limit")]
    TooLarge(usize),
    #[error("window mismatch in superposition")]
    WindowMismatch,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("resource cap: {points} points exceeds the per-replicate cap {cap}")]
    ResourceCap { points: usize, cap: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Seed plus stream id; each pair yields an independent ChaCha stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }

    /// An independent stream for the j-th sub-sampler of a composite sampler.
    pub fn child(&self, j: u64) -> Self {
        RngStream {
            seed: splitmix(self.seed ^ splitmix(j.wrapping_add(0x5bd1_e995))),
            stream: self.stream,
        }
    }
}

pub fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub process: String,
    pub params: Vec<(String, f64)>,
    pub seed: u64,
    pub stream: u64,
}

impl Provenance {
    pub fn new(process: &str, params: &[(&str, f64)], rng: RngStream) -> Self {
        Provenance {
            process: process.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            seed: rng.seed,
            stream: rng.stream,
        }
    }
}

/// A finite point set with the window it lives in and the (optional) larger
/// cube that was actually sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration<T> {
    points: Vec<Point<T>>,
    window: Window<T>,
    buffer: Option<Window<T>>,
    provenance: Provenance,
}

impl<T: Real> PointConfiguration<T> {
    pub fn new(
        points: Vec<Point<T>>,
        window: Window<T>,
        buffer: Option<Window<T>>,
        provenance: Provenance,
    ) -> Result<Self, ProcessError> {
        let region = buffer.unwrap_or(window);
        if buffer.is_some_and(|b| b.half_side() < window.half_side() || b.dim() != window.dim()) {
            return Err(ProcessError::InvalidParameter(
                "buffer smaller than window".into(),
            ));
        }
        for p in &points {
            if p.dim() != window.dim() {
                return Err(GeometryError::UnsupportedDimension(p.dim()).into());
            }
            if !region.contains(p) {
                return Err(ProcessError::OutsideRegion);
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].lex_cmp(&points[b]));
        if order.windows(2).any(|w| points[w[0]] == points[w[1]]) {
            return Err(ProcessError::DuplicatePoint);
        }
        Ok(PointConfiguration {
            points,
            window,
            buffer,
            provenance,
        })
    }

    /// Configuration from bare points in a window, with a blank provenance.
    pub fn from_points(points: Vec<Point<T>>, window: Window<T>) -> Result<Self, ProcessError> {
        Self::new(
            points,
            window,
            None,
            Provenance::new("fixture", &[], RngStream::new(0, 0)),
        )
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn buffer(&self) -> Option<&Window<T>> {
        self.buffer.as_ref()
    }

    /// The sampled region: the buffer if present, else the window.
    pub fn region(&self) -> &Window<T> {
        self.buffer.as_ref().unwrap_or(&self.window)
    }

    pub fn margin(&self) -> T {
        self.region().half_side() - self.window.half_side()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Indices of points inside the window.
    pub fn window_indices(&self) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| self.window.contains(&self.points[i]))
            .collect()
    }

    /// P ∩ W with the buffer dropped.
    pub fn restricted(&self) -> Self {
        PointConfiguration {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| self.window.contains(p))
                .collect(),
            window: self.window,
            buffer: None,
            provenance: self.provenance.clone(),
        }
    }

    /// Columnar text: header `d n seed process`, then one point per line.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} {} {} {}\n",
            self.dim(),
            self.window.volume().f64(),
            self.provenance.seed,
            self.provenance.process.replace(char::is_whitespace, "_")
        );
        for p in &self.points {
            let line: Vec<String> = p
                .coords()
                .iter()
                .map(|v| format!("{:.16e}", v.f64()))
                .collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ProcessError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| ProcessError::Parse("empty input".into()))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 4 {
            return Err(ProcessError::Parse(format!(
                "header needs `d n seed process`, got `{header}`"
            )));
        }
        let bad = |what: &str| ProcessError::Parse(format!("bad {what} in header"));
        let d: usize = f[0].parse().map_err(|_| bad("d"))?;
        let n: f64 = f[1].parse().map_err(|_| bad("n"))?;
        let seed: u64 = f[2].parse().map_err(|_| bad("seed"))?;
        let window = Window::new(T::of(n), d)?;
        let mut points = Vec::new();
        let mut reach = window.half_side();
        for (i, line) in lines.enumerate() {
            let c: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
            let c = c.map_err(|_| {
                ProcessError::Parse(format!("bad coordinate on point line {}", i + 1))
            })?;
            if c.len() != d {
                return Err(ProcessError::Parse(format!(
                    "point line {} has {} coordinates",
                    i + 1,
                    c.len()
                )));
            }
            let p = Point::<T>::from_f64(&c)?;
            for &v in p.coords() {
                reach = reach.max(v.abs());
            }
            points.push(p);
        }
        let buffer =
            (reach > window.half_side()).then(|| window.enlarged(reach - window.half_side()));
        let prov = Provenance {
            process: f[3].to_string(),
            params: Vec::new(),
            seed,
            stream: 0,
        };
        Self::new(points, window, buffer, prov)
    }

    pub fn cast<U: Real>(&self) -> Result<PointConfiguration<U>, ProcessError> {
        let window = Window::new(U::of(self.window.volume().f64()), self.dim())?;
        let buffer = match self.buffer {
            Some(b) => {
                Some(window.enlarged(U::of((b.half_side() - self.window.half_side()).f64())))
            }
            None => None,
        };
        PointConfiguration::new(
            self.points.iter().map(|p| p.cast()).collect(),
            window,
            buffer,
            self.provenance.clone(),
        )
    }
}

/// Multiset union of configurations on a common window.
pub fn superpose<T: Real>(
    configs: &[PointConfiguration<T>],
) -> Result<PointConfiguration<T>, ProcessError> {
    let first = configs
        .first()
        .ok_or_else(|| ProcessError::InvalidParameter("nothing to superpose".into()))?;
    if configs
        .iter()
        .any(|c| c.window != first.window || c.buffer != first.buffer)
    {
        return Err(ProcessError::WindowMismatch);
    }
    let points: Vec<Point<T>> = configs
        .iter()
        .flat_map(|c| c.points.iter().copied())
        .collect();
    let name = format!(
        "superposition[{}x{}]",
        configs.len(),
        first.provenance.process
    );
    let prov = Provenance {
        process: name,
        params: first.provenance.params.clone(),
        seed: first.provenance.seed,
        stream: first.provenance.stream,
    };
    PointConfiguration::new(points, first.window, first.buffer, prov)
}

/// Uniform point in the centered cube of half-side `h`.
pub(crate) fn uniform_in_cube<R: rand::Rng>(rng: &mut R, h: f64, d: usize) -> [f64; 3] {
    let mut c = [0.0; 3];
    for v in c.iter_mut().take(d) {
        *v = rng.gen_range(-h..=h);
    }
    c
}

pub(crate) fn to_point<T: Real>(c: &[f64; 3], d: usize) -> Point<T> {
    let v: Vec<T> = c[..d].iter().map(|&x| T::of(x)).collect();
    Point::new(&v).expect("finite sampled coordinate")
}

/// Builds a configuration from f64 coordinates, keeping those inside the region.
pub(crate) fn assemble<T: Real>(
    coords: impl IntoIterator<Item = [f64; 3]>,
    window: &Window<T>,
    margin: T,
    prov: Provenance,
) -> Result<PointConfiguration<T>, ProcessError> {
    let region = window.enlarged(margin);
    let d = window.dim();
    let pts: Vec<Point<T>> = coords
        .into_iter()
        .map(|c| to_point::<T>(&c, d))
        .filter(|p| region.contains(p))
        .collect();
    let buffer = (margin > T::zero()).then_some(region);
    PointConfiguration::new(pts, *window, buffer, prov)
}
