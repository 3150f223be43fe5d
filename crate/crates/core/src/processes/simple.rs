use super::{assemble, uniform_in_cube, PointConfiguration, ProcessError, Provenance, RngStream};
use crate::geometry::{SpatialIndex, Window};
use crate::scalar::Real;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

pub(crate) fn poisson_count<R: Rng>(rng: &mut R, mean: f64) -> Result<usize, ProcessError> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| ProcessError::InvalidParameter(e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

pub(crate) fn poisson_coords<R: Rng>(
    rng: &mut R,
    half: f64,
    d: usize,
    intensity: f64,
) -> Result<Vec<[f64; 3]>, ProcessError> {
    let vol = (2.0 * half).powi(d as i32);
    let n = poisson_count(rng, intensity * vol)?;
    Ok((0..n).map(|_| uniform_in_cube(rng, half, d)).collect())
}

/// Homogeneous Poisson process on the window enlarged by `margin`.
pub fn sample_poisson<T: Real>(
    window: &Window<T>,
    margin: T,
    intensity: T,
    stream: RngStream,
) -> Result<PointConfiguration<T>, ProcessError> {
    if !(intensity > T::zero()) {
        return Err(ProcessError::InvalidParameter(
            "intensity must be positive".into(),
        ));
    }
    let mut rng = stream.rng();
    let half = (window.half_side() + margin).f64();
    let coords = poisson_coords(&mut rng, half, window.dim(), intensity.f64())?;
    assemble(
        coords,
        window,
        margin,
        Provenance::new("poisson", &[("intensity", intensity.f64())], stream),
    )
}

/// Matérn II hard-core thinning. Proposals are drawn on the region enlarged by
/// `h`, so points inside the region see every competitor.
pub fn sample_matern2<T: Real>(
    window: &Window<T>,
    margin: T,
    proposal_intensity: T,
    h: T,
    stream: RngStream,
) -> Result<PointConfiguration<T>, ProcessError> {
    if !(proposal_intensity > T::zero()) || h < T::zero() {
        return Err(ProcessError::InvalidParameter(
            "need λ_p > 0 and h ≥ 0".into(),
        ));
    }
    let mut rng = stream.rng();
    let d = window.dim();
    let half = (window.half_side() + margin + h).f64();
    let coords = poisson_coords(&mut rng, half, d, proposal_intensity.f64())?;
    let marks: Vec<f64> = (0..coords.len()).map(|_| rng.gen::<f64>()).collect();
    let pts: Vec<_> = coords
        .iter()
        .map(|c| super::to_point::<f64>(c, d))
        .collect();
    let hf = h.f64();
    let kept: Vec<[f64; 3]> = if hf > 0.0 {
        let idx = SpatialIndex::build(&pts, hf);
        (0..pts.len())
            .filter(|&i| {
                let mut ok = true;
                idx.for_each_within(&pts[i], hf, |j, _| ok &= marks[j] > marks[i]);
                ok
            })
            .map(|i| coords[i])
            .collect()
    } else {
        coords
    };
    let prov = Provenance::new(
        "matern2",
        &[("intensity", proposal_intensity.f64()), ("hardcore", hf)],
        stream,
    );
    assemble(kept, window, margin, prov)
}

/// Matérn cluster process: Poisson parents on the region enlarged by R_c, each
/// with Poisson(μ) offspring uniform in its R_c-ball.
pub fn sample_matern_cluster<T: Real>(
    window: &Window<T>,
    margin: T,
    parent_intensity: T,
    mean_offspring: T,
    radius: T,
    stream: RngStream,
) -> Result<PointConfiguration<T>, ProcessError> {
    if !(parent_intensity > T::zero() && mean_offspring > T::zero() && radius > T::zero()) {
        return Err(ProcessError::InvalidParameter(
            "cluster parameters must be positive".into(),
        ));
    }
    let mut rng = stream.rng();
    let d = window.dim();
    let rc = radius.f64();
    let half = (window.half_side() + margin).f64() + rc;
    let parents = poisson_coords(&mut rng, half, d, parent_intensity.f64())?;
    let mut kids = Vec::new();
    for p in &parents {
        let m = poisson_count(&mut rng, mean_offspring.f64())?;
        for _ in 0..m {
            let off = loop {
                let c = uniform_in_cube(&mut rng, rc, d);
                if c.iter().map(|v| v * v).sum::<f64>() <= rc * rc {
                    break c;
                }
            };
            kids.push([p[0] + off[0], p[1] + off[1], p[2] + off[2]]);
        }
    }
    let prov = Provenance::new(
        "matern_cluster",
        &[
            ("parent_intensity", parent_intensity.f64()),
            ("mean_offspring", mean_offspring.f64()),
            ("radius", rc),
        ],
        stream,
    );
    assemble(kids, window, margin, prov)
}
