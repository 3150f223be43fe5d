use super::{
    sample_alpha_determinantal, sample_alpha_permanental, sample_beta_ginibre, sample_gef_zeros,
    sample_ginibre, sample_matern2, sample_matern_cluster, sample_permanental_cox, sample_poisson,
    GaussianKernel, PointConfiguration, ProcessError, RngStream, DEFAULT_MAX_GINIBRE_N,
};
use crate::geometry::Window;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Caps that turn runaway experiments into errors instead of OOM.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub max_points: usize,
    pub max_ginibre_n: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_points: 1_000_000,
            max_ginibre_n: DEFAULT_MAX_GINIBRE_N,
        }
    }
}

/// A process family with its parameters, as read from experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessSpec {
    Poisson {
        intensity: f64,
    },
    Matern2 {
        proposal_intensity: f64,
        hardcore: f64,
    },
    MaternCluster {
        parent_intensity: f64,
        mean_offspring: f64,
        radius: f64,
    },
    Ginibre,
    BetaGinibre {
        beta: f64,
    },
    AlphaDeterminantal {
        m: usize,
    },
    Permanental {
        amplitude: f64,
        ell: f64,
        step: Option<f64>,
    },
    AlphaPermanental {
        amplitude: f64,
        ell: f64,
        m: usize,
        step: Option<f64>,
    },
    GefZeros {
        truncation: Option<usize>,
    },
}

impl ProcessSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::Poisson { .. } => "poisson",
            ProcessSpec::Matern2 { .. } => "matern2",
            ProcessSpec::MaternCluster { .. } => "matern_cluster",
            ProcessSpec::Ginibre => "ginibre",
            ProcessSpec::BetaGinibre { .. } => "beta_ginibre",
            ProcessSpec::AlphaDeterminantal { .. } => "alpha_determinantal",
            ProcessSpec::Permanental { .. } => "permanental",
            ProcessSpec::AlphaPermanental { .. } => "alpha_permanental",
            ProcessSpec::GefZeros { .. } => "gef_zeros",
        }
    }

    /// First-order intensity ρ⁽¹⁾.
    pub fn intensity(&self) -> f64 {
        match *self {
            ProcessSpec::Poisson { intensity } => intensity,
            ProcessSpec::Matern2 {
                proposal_intensity,
                hardcore,
            } => {
                let v = PI * hardcore * hardcore;
                if v == 0.0 {
                    proposal_intensity
                } else {
                    (1.0 - (-proposal_intensity * v).exp()) / v
                }
            }
            ProcessSpec::MaternCluster {
                parent_intensity,
                mean_offspring,
                ..
            } => parent_intensity * mean_offspring,
            ProcessSpec::Ginibre
            | ProcessSpec::BetaGinibre { .. }
            | ProcessSpec::AlphaDeterminantal { .. } => 1.0,
            ProcessSpec::Permanental { amplitude, .. }
            | ProcessSpec::AlphaPermanental { amplitude, .. } => amplitude,
            ProcessSpec::GefZeros { .. } => 1.0 / PI,
        }
    }

    /// Pair correlation g(s) where a closed form exists (d = 2 for the cluster process).
    pub fn pair_correlation(&self, s: f64) -> Option<f64> {
        match *self {
            ProcessSpec::Poisson { .. } => Some(1.0),
            ProcessSpec::Ginibre => Some(1.0 - (-PI * s * s).exp()),
            ProcessSpec::BetaGinibre { beta } => Some(1.0 - (-PI * s * s / beta).exp()),
            ProcessSpec::AlphaDeterminantal { m } => Some(1.0 - (-PI * s * s).exp() / m as f64),
            ProcessSpec::Permanental { ell, .. } => Some(1.0 + (-s * s / (ell * ell)).exp()),
            ProcessSpec::AlphaPermanental { ell, m, .. } => {
                Some(1.0 + (-s * s / (ell * ell)).exp() / m as f64)
            }
            ProcessSpec::MaternCluster {
                parent_intensity,
                radius,
                ..
            } => {
                let r = radius;
                let lens = if s >= 2.0 * r {
                    0.0
                } else {
                    2.0 * r * r * (s / (2.0 * r)).acos() - 0.5 * s * (4.0 * r * r - s * s).sqrt()
                };
                Some(1.0 + lens / (parent_intensity * (PI * r * r).powi(2)))
            }
            ProcessSpec::Matern2 { .. } | ProcessSpec::GefZeros { .. } => None,
        }
    }

    /// Distance beyond which correlations are negligible (zero for finite range).
    pub fn correlation_length(&self) -> f64 {
        match *self {
            ProcessSpec::Poisson { .. } => 0.0,
            ProcessSpec::Matern2 { hardcore, .. } => 2.0 * hardcore,
            ProcessSpec::MaternCluster { radius, .. } => 2.0 * radius,
            ProcessSpec::BetaGinibre { beta } => beta.sqrt(),
            ProcessSpec::Ginibre
            | ProcessSpec::AlphaDeterminantal { .. }
            | ProcessSpec::GefZeros { .. } => 1.0,
            ProcessSpec::Permanental { ell, .. } | ProcessSpec::AlphaPermanental { ell, .. } => ell,
        }
    }

    /// Supported dimensions.
    pub fn supports_dim(&self, d: usize) -> bool {
        match self {
            ProcessSpec::Poisson { .. }
            | ProcessSpec::Matern2 { .. }
            | ProcessSpec::MaternCluster { .. } => (1..=3).contains(&d),
            ProcessSpec::Permanental { .. } | ProcessSpec::AlphaPermanental { .. } => {
                (1..=2).contains(&d)
            }
            _ => d == 2,
        }
    }

    /// Samples on the window enlarged by `margin`, enforcing the point cap before
    /// and after sampling.
    pub fn sample<T: Real>(
        &self,
        window: &Window<T>,
        margin: T,
        stream: RngStream,
        limits: &Limits,
    ) -> Result<PointConfiguration<T>, ProcessError> {
        let d = window.dim();
        if !self.supports_dim(d) {
            return Err(ProcessError::InvalidParameter(format!(
                "{} does not support d = {d}",
                self.name()
            )));
        }
        let vol = window.enlarged(margin).volume().f64();
        let mean = match *self {
            ProcessSpec::Matern2 {
                proposal_intensity, ..
            } => proposal_intensity,
            _ => self.intensity(),
        } * vol;
        if mean > limits.max_points as f64 {
            return Err(ProcessError::ResourceCap {
                points: mean.ceil() as usize,
                cap: limits.max_points,
            });
        }
        let cfg = match *self {
            ProcessSpec::Poisson { intensity } => {
                sample_poisson(window, margin, T::of(intensity), stream)
            }
            ProcessSpec::Matern2 {
                proposal_intensity,
                hardcore,
            } => sample_matern2(
                window,
                margin,
                T::of(proposal_intensity),
                T::of(hardcore),
                stream,
            ),
            ProcessSpec::MaternCluster {
                parent_intensity,
                mean_offspring,
                radius,
            } => sample_matern_cluster(
                window,
                margin,
                T::of(parent_intensity),
                T::of(mean_offspring),
                T::of(radius),
                stream,
            ),
            ProcessSpec::Ginibre => sample_ginibre(window, margin, stream, limits.max_ginibre_n),
            ProcessSpec::BetaGinibre { beta } => {
                sample_beta_ginibre(window, margin, T::of(beta), stream, limits.max_ginibre_n)
            }
            ProcessSpec::AlphaDeterminantal { m } => {
                sample_alpha_determinantal(window, margin, m, stream, limits.max_ginibre_n)
            }
            ProcessSpec::Permanental {
                amplitude,
                ell,
                step,
            } => sample_permanental_cox(
                window,
                margin,
                &GaussianKernel { amplitude, ell },
                step,
                stream,
            ),
            ProcessSpec::AlphaPermanental {
                amplitude,
                ell,
                m,
                step,
            } => sample_alpha_permanental(
                window,
                margin,
                &GaussianKernel { amplitude, ell },
                m,
                step,
                stream,
            ),
            ProcessSpec::GefZeros { truncation } => {
                sample_gef_zeros(window, margin, truncation, stream)
            }
        }?;
        if cfg.len() > limits.max_points {
            return Err(ProcessError::ResourceCap {
                points: cfg.len(),
                cap: limits.max_points,
            });
        }
        Ok(cfg)
    }
}
