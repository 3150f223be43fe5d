use super::{Provenance, ResultSet, RunnerError, Statistic};
use crate::cumulants::{
    clt_diagnostics, k_statistics, loglog_slope, required_replicates, CumulantLadder,
};
use crate::moments::{Estimate, SigmaSq};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub n: f64,
    pub replicates: usize,
    pub mean: f64,
    pub mean_stderr: f64,
    /// Unbiased variance (k₂) with its jackknife error; needs ≥ 4 replicates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticSummary {
    pub statistic: Statistic,
    /// Log-log slope of |mean| against n.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_slope: Option<SlopeFit>,
    /// Log-log slope of the variance against n.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_slope: Option<SlopeFit>,
    pub points: Vec<PointSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantSummary {
    pub statistic: Statistic,
    pub k_max: usize,
    /// Slopes of |S_k| for k = 1..k_max.
    pub slopes: Vec<SlopeFit>,
    pub normalized_skewness: Vec<SlopeFitAt>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFitAt {
    pub n: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltSummary {
    pub statistic: Statistic,
    pub n: f64,
    pub replicates: usize,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_distance: f64,
    pub ks_p_value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceSummary {
    pub n: f64,
    pub plugin: f64,
    pub plugin_stderr: f64,
    pub surface: f64,
    pub surface_stderr: f64,
}

/// Derived quantities written next to the results as `<stem>.summary`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overruns: Option<usize>,
    /// Derived outputs that were requested but could not be formed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_sq: Option<VarianceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cumulants: Option<CumulantSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clt: Option<CltSummary>,
    pub statistics: Vec<StatisticSummary>,
    #[serde(skip)]
    pub ladder: Option<CumulantLadder>,
}

fn fit(e: Option<crate::cumulants::Slope>) -> Option<SlopeFit> {
    e.filter(|s| s.value.is_finite()).map(|s| SlopeFit {
        value: s.value,
        stderr: s.stderr,
    })
}

fn summarize(stat: Statistic, series: &[(f64, Vec<f64>)]) -> StatisticSummary {
    let points: Vec<PointSummary> = series
        .iter()
        .map(|(n, v)| {
            let m = Estimate::from_values(v);
            let k2 = k_statistics(v, 2).ok().map(|k| k[1]);
            PointSummary {
                n: *n,
                replicates: v.len(),
                mean: m.value,
                mean_stderr: m.stderr,
                variance: k2.map(|e| e.value),
                variance_stderr: k2.map(|e| e.stderr),
            }
        })
        .collect();
    let ns: Vec<f64> = points.iter().map(|p| p.n).collect();
    let means: Vec<Estimate> = points
        .iter()
        .map(|p| Estimate {
            value: p.mean,
            stderr: p.mean_stderr,
        })
        .collect();
    let vars: Option<Vec<Estimate>> = points
        .iter()
        .map(|p| {
            Some(Estimate {
                value: p.variance?,
                stderr: p.variance_stderr?,
            })
        })
        .collect();
    StatisticSummary {
        statistic: stat,
        mean_slope: fit(loglog_slope(&ns, &means)),
        variance_slope: fit(vars.and_then(|v| loglog_slope(&ns, &v))),
        points,
    }
}

impl Summary {
    /// Per-statistic moments and slope fits; the cumulant ladder on μ(f) when
    /// every ladder point has enough replicates for k = 3 (k = 4 from 2000 on),
    /// and the CLT report on Ĥ at the largest n.
    pub fn from_results(results: &ResultSet) -> Result<Summary, RunnerError> {
        let statistics: Vec<StatisticSummary> = results
            .statistics()
            .into_iter()
            .map(|s| summarize(s, &results.series(s)))
            .collect();
        let mut ladder = None;
        let mut cumulants = None;
        let mut notes = Vec::new();
        let mu = results.series(Statistic::MuF);
        let fewest = mu.iter().map(|(_, v)| v.len()).min().unwrap_or(0);
        if !mu.is_empty() && fewest >= required_replicates(3) {
            let k_max = if fewest >= required_replicates(4) {
                4
            } else {
                3
            };
            match CumulantLadder::from_values(mu, k_max) {
                Ok(l) => {
                    cumulants = Some(CumulantSummary {
                        statistic: Statistic::MuF,
                        k_max,
                        slopes: (1..=k_max).filter_map(|k| fit(l.slope(k))).collect(),
                        normalized_skewness: l
                            .points
                            .iter()
                            .map(|p| SlopeFitAt {
                                n: p.n,
                                value: p.normalized_skewness.value,
                                stderr: p.normalized_skewness.stderr,
                            })
                            .collect(),
                    });
                    ladder = Some(l);
                }
                Err(e) => notes.push(format!("cumulant ladder: {e}")),
            }
        }
        let clt = match results.series(Statistic::HHat).last() {
            Some((n, v)) if v.len() >= crate::cumulants::MIN_CLT_REPLICATES => {
                match clt_diagnostics(v) {
                    Err(e) => {
                        notes.push(format!("clt report: {e}"));
                        None
                    }
                    Ok(r) => Some(CltSummary {
                        statistic: Statistic::HHat,
                        n: *n,
                        replicates: r.replicates,
                        skewness: r.skewness,
                        excess_kurtosis: r.excess_kurtosis,
                        ks_distance: r.ks_distance,
                        ks_p_value: r.ks_p_value,
                    }),
                }
            }
            _ => None,
        };
        Ok(Summary {
            provenance: results.provenance.clone(),
            overruns: None,
            notes,
            sigma_sq: None,
            cumulants,
            clt,
            statistics,
            ladder,
        })
    }

    pub fn with_variances(mut self, n: f64, plugin: SigmaSq, surface: SigmaSq) -> Self {
        self.sigma_sq = Some(VarianceSummary {
            n,
            plugin: plugin.value,
            plugin_stderr: plugin.stderr,
            surface: surface.value,
            surface_stderr: surface.stderr,
        });
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("summaries serialize")
    }

    pub fn write(&self, path: &Path) -> Result<(), RunnerError> {
        std::fs::write(path, self.to_toml())
            .map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))
    }
}

/// `results.csv` → `results.summary`.
pub fn summary_path(results: &Path) -> PathBuf {
    results.with_extension("summary")
}
