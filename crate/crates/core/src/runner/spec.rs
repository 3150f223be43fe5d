use super::RunnerError;
use crate::cumulants::{required_replicates, MIN_CLT_REPLICATES};
use crate::moments::MIN_REPLICATES;
use crate::processes::{Limits, ProcessSpec};
use crate::scores::{ScoreSpec, TestFunction};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Per-replicate statistics; these become result rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Statistic {
    /// Σ ξ(x, P ∩ W) over the window points.
    #[serde(rename = "H")]
    H,
    /// Σ ξ(x, P) with the sample extended by the buffer.
    #[serde(rename = "H_hat")]
    HHat,
    /// μ_n^ξ(f) for the configured test function.
    #[serde(rename = "mu_f")]
    MuF,
}

impl Statistic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::H => "H",
            Statistic::HHat => "H_hat",
            Statistic::MuF => "mu_f",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "H" => Some(Statistic::H),
            "H_hat" => Some(Statistic::HHat),
            "mu_f" => Some(Statistic::MuF),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    #[serde(rename = "H")]
    H,
    #[serde(rename = "H_hat")]
    HHat,
    #[serde(rename = "mu_f")]
    MuF,
    M2Profile,
    CumulantLadder,
    CltReport,
    DecayCurve,
}

impl Output {
    pub fn statistic(&self) -> Option<Statistic> {
        match self {
            Output::H => Some(Statistic::H),
            Output::HHat => Some(Statistic::HHat),
            Output::MuF => Some(Statistic::MuF),
            _ => None,
        }
    }
}

fn default_outputs() -> Vec<Output> {
    vec![Output::H, Output::HHat]
}

fn two() -> usize {
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct M2Settings {
    pub delta: f64,
    pub s_max: f64,
}

impl Default for M2Settings {
    fn default() -> Self {
        M2Settings {
            delta: 0.1,
            s_max: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySettings {
    pub orders: Vec<usize>,
    pub max_diameter: f64,
    pub step: f64,
    pub samples: usize,
}

impl Default for DecaySettings {
    fn default() -> Self {
        DecaySettings {
            orders: vec![2, 3],
            max_diameter: 6.0,
            step: 0.5,
            samples: 100,
        }
    }
}

impl DecaySettings {
    pub fn diameters(&self) -> Vec<f64> {
        let k = (self.max_diameter / self.step + 1e-9).floor() as usize;
        (0..=k).map(|i| i as f64 * self.step).collect()
    }
}

/// A declarative experiment: process, score, window ladder and replication.
/// Values come first and tables last so the TOML form is flat per section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: u64,
    #[serde(default = "two")]
    pub dim: usize,
    /// Window volumes n, strictly increasing.
    pub ladder: Vec<f64>,
    pub replicates: usize,
    #[serde(default)]
    pub test_function: TestFunction,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    /// Buffer margin for Ĥ; defaults to the score's own bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_max: Option<f64>,
    pub process: ProcessSpec,
    pub score: ScoreSpec,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub m2: M2Settings,
    #[serde(default)]
    pub decay: DecaySettings,
}

/// The fields that determine row values. Replicates, ladder, outputs and caps
/// are left out, so a rerun that only adds replicates or windows can append.
#[derive(Serialize)]
struct HashKey<'a> {
    seed: u64,
    dim: usize,
    test_function: &'a TestFunction,
    rho_max: f64,
    process: &'a ProcessSpec,
    score: &'a ScoreSpec,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, RunnerError> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| RunnerError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment specs serialize")
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        let bad = |m: String| Err(RunnerError::Config(m));
        if !(1..=3).contains(&self.dim) {
            return bad(format!("dim must be 1, 2 or 3, got {}", self.dim));
        }
        if !self.process.supports_dim(self.dim) {
            return bad(format!(
                "process {} does not support dim = {}",
                self.process.name(),
                self.dim
            ));
        }
        self.score.build::<f64>()?.check_dim(self.dim)?;
        if self.ladder.is_empty() || self.ladder.iter().any(|n| !(n.is_finite() && *n > 0.0)) {
            return bad("ladder needs positive window volumes".into());
        }
        if self.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return bad("ladder must be strictly increasing".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.outputs.is_empty() {
            return bad("no outputs requested".into());
        }
        if let Some(r) = self.rho_max {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!("rho_max must be finite and non-negative, got {r}"));
            }
        }
        for o in &self.outputs {
            let need = match o {
                Output::M2Profile => MIN_REPLICATES,
                Output::CumulantLadder => required_replicates(3),
                Output::CltReport => MIN_CLT_REPLICATES,
                _ => 0,
            };
            if self.replicates < need {
                return bad(format!(
                    "{o:?} needs at least {need} replicates, got {}",
                    self.replicates
                ));
            }
        }
        if self.wants(Output::M2Profile) && !(self.m2.delta > 0.0 && self.m2.s_max > self.m2.delta)
        {
            return bad("m2 needs 0 < delta < s_max".into());
        }
        if self.wants(Output::DecayCurve) {
            if !matches!(
                self.process,
                ProcessSpec::Ginibre | ProcessSpec::Poisson { .. }
            ) || self.dim != 2
            {
                return bad(
                    "decay_curve is available for ginibre and poisson input in d = 2".into(),
                );
            }
            if !matches!(self.score, ScoreSpec::Constant { .. }) {
                return bad("decay_curve needs the constant score".into());
            }
            let d = &self.decay;
            if d.orders.iter().any(|&p| !(1..=6).contains(&p)) || !(d.step > 0.0) || d.samples == 0
            {
                return bad(
                    "decay orders must lie in 1..=6 with a positive step and samples".into(),
                );
            }
        }
        Ok(())
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }

    /// Statistics stored as rows, in a fixed order. The cumulant ladder is
    /// built on μ(f) and the CLT report on Ĥ, so those imply their rows.
    pub fn statistics(&self) -> Vec<Statistic> {
        let mut s: Vec<Statistic> = self.outputs.iter().filter_map(|o| o.statistic()).collect();
        if self.wants(Output::CumulantLadder) {
            s.push(Statistic::MuF);
        }
        if self.wants(Output::CltReport) {
            s.push(Statistic::HHat);
        }
        s.sort();
        s.dedup();
        s
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max.unwrap_or_else(|| {
            self.score
                .default_rho_max(self.process.intensity(), self.dim)
        })
    }

    /// SHA-256 over the value-determining fields, hex encoded.
    pub fn hash(&self) -> String {
        let key = HashKey {
            seed: self.seed,
            dim: self.dim,
            test_function: &self.test_function,
            rho_max: self.rho_max(),
            process: &self.process,
            score: &self.score,
        };
        let bytes = serde_json::to_vec(&key).expect("hash key serializes");
        Sha256::digest(bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
