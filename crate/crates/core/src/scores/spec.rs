use super::{
    CechPattern, CliqueCount, Constant, Coverage, DownDegree, EdgeLength, IntrinsicVolume,
    KnnEdgeLength, Morse, ScoreError, ScoreFunction, DEFAULT_COVERAGE_NODES,
};
use crate::geometry::Point;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

fn one() -> f64 {
    1.0
}

/// Score family and parameters as written in experiment configs, e.g.
/// `score = "edge_length"` with `r = 0.5`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "score", rename_all = "snake_case")]
pub enum ScoreSpec {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    EdgeLength {
        r: f64,
    },
    CliqueCount {
        k: usize,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pattern: Option<Vec<Vec<usize>>>,
    },
    Degree {
        k: usize,
        r: f64,
    },
    Morse {
        k: usize,
        r: f64,
    },
    Coverage {
        k: usize,
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<usize>,
    },
    IntrinsicVolume {
        j: usize,
        r: f64,
    },
    KnnEdgeLength {
        k: usize,
    },
}

impl ScoreSpec {
    pub fn build<T: Real>(&self) -> Result<Box<dyn ScoreFunction<T>>, ScoreError> {
        let pos = |r: f64| {
            if r > 0.0 && r.is_finite() {
                Ok(T::of(r))
            } else {
                Err(ScoreError::InvalidParameter(format!(
                    "radius {r} must be positive"
                )))
            }
        };
        Ok(match self {
            ScoreSpec::Constant { value } => Box::new(Constant {
                value: T::of(*value),
            }),
            ScoreSpec::EdgeLength { r } => Box::new(EdgeLength { r: pos(*r)? }),
            ScoreSpec::CliqueCount {
                k,
                r,
                pattern: None,
            } => Box::new(CliqueCount::new(*k, pos(*r)?)?),
            ScoreSpec::CliqueCount {
                k,
                r,
                pattern: Some(p),
            } => Box::new(CliqueCount::with_pattern(
                pos(*r)?,
                CechPattern::new(*k, p)?,
            )?),
            ScoreSpec::Degree { k, r } => {
                if *k == 0 {
                    return Err(ScoreError::InvalidParameter("degree needs k ≥ 1".into()));
                }
                Box::new(DownDegree { k: *k, r: pos(*r)? })
            }
            ScoreSpec::Morse { k, r } => Box::new(Morse::new(*k, pos(*r)?)?),
            ScoreSpec::Coverage { k, r, nodes } => Box::new(Coverage::new(
                *k,
                pos(*r)?,
                nodes.unwrap_or(DEFAULT_COVERAGE_NODES),
            )?),
            ScoreSpec::IntrinsicVolume { j, r } => Box::new(IntrinsicVolume::new(*j, pos(*r)?)?),
            ScoreSpec::KnnEdgeLength { k } => Box::new(KnnEdgeLength::new(*k)?),
        })
    }

    /// Default buffer margin: the fixed interaction range, or six times the
    /// k-NN scale (radius of a ball holding k points on average).
    pub fn default_rho_max(&self, intensity: f64, d: usize) -> f64 {
        match *self {
            ScoreSpec::Constant { .. } => 0.0,
            ScoreSpec::EdgeLength { r } => r,
            ScoreSpec::CliqueCount { k, r, .. } => 2.0 * r * (k.max(2) - 1) as f64,
            ScoreSpec::Degree { r, .. } => 4.0 * r,
            ScoreSpec::Morse { r, .. }
            | ScoreSpec::Coverage { r, .. }
            | ScoreSpec::IntrinsicVolume { r, .. } => 2.0 * r,
            ScoreSpec::KnnEdgeLength { k } => {
                let vol = super::local::unit_ball_volume(d);
                6.0 * (k as f64 / (intensity * vol)).powf(1.0 / d as f64)
            }
        }
    }

    /// Scale used for default radial bin widths.
    pub fn scale(&self) -> f64 {
        match *self {
            ScoreSpec::Constant { .. } => 1.0,
            ScoreSpec::KnnEdgeLength { .. } => 1.0,
            ScoreSpec::EdgeLength { r }
            | ScoreSpec::CliqueCount { r, .. }
            | ScoreSpec::Degree { r, .. }
            | ScoreSpec::Morse { r, .. }
            | ScoreSpec::Coverage { r, .. }
            | ScoreSpec::IntrinsicVolume { r, .. } => r,
        }
    }
}

/// Test function f on the unit window [−1/2,1/2]^d for μ_n^ξ(f).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    #[default]
    Const,
    /// Indicator of the left half x₁ < 0.
    HalfWindow,
    /// 1 + x₁.
    Affine,
}

impl TestFunction {
    pub fn eval<T: Real>(&self, x: &Point<T>) -> T {
        match self {
            TestFunction::Const => T::one(),
            TestFunction::HalfWindow => {
                if x.coord(0) < T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            TestFunction::Affine => T::one() + x.coord(0),
        }
    }
}
