//! Experiment orchestration: declarative specs, seeded parallel replication
//! over (n, replicate) pairs, persistence of result rows and summaries.

mod results;
mod spec;
mod summary;

pub use results::{Format, Provenance, ResultSet, Row, VERSION};
pub use spec::{DecaySettings, ExperimentSpec, M2Settings, Output, Statistic};
pub use summary::{
    summary_path, CltSummary, CumulantSummary, PointSummary, SlopeFit, SlopeFitAt,
    StatisticSummary, Summary, VarianceSummary,
};

use crate::cumulants::{ursell_decay_scan, CumulantError, DecayPoint};
use crate::geometry::{GeometryError, Window};
use crate::moments::{
    m2_from_samples, sigma_sq_plugin, sigma_sq_surface, MomentEstimate, MomentsError, ScoredSample,
};
use crate::processes::{splitmix, GinibreKernel, ProcessError, ProcessSpec, RngStream};
use crate::scores::{buffered_scores, ScoreError, ScoreFunction, WeightedMeasure};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunnerError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource cap: {0}")]
    ResourceCap(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
    #[error("{path} was written from spec {existing}, refusing to append results of spec {new}")]
    HashMismatch {
        path: String,
        existing: String,
        new: String,
    },
}

impl RunnerError {
    /// 2 config, 3 resource cap, 4 numeric; I/O failures exit with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Config(_) | RunnerError::HashMismatch { .. } => 2,
            RunnerError::ResourceCap(_) => 3,
            RunnerError::Numeric(_) => 4,
            RunnerError::Io(_) => 1,
        }
    }
}

impl From<ProcessError> for RunnerError {
    fn from(e: ProcessError) -> Self {
        let m = e.to_string();
        match e {
            ProcessError::ResourceCap { .. }
            | ProcessError::WindowTooLarge { .. }
            | ProcessError::TooLarge(_) => RunnerError::ResourceCap(m),
            ProcessError::InvalidParameter(_)
            | ProcessError::Geometry(_)
            | ProcessError::TruncationTooSmall { .. }
            | ProcessError::Parse(_) => RunnerError::Config(m),
            _ => RunnerError::Numeric(m),
        }
    }
}

impl From<ScoreError> for RunnerError {
    fn from(e: ScoreError) -> Self {
        RunnerError::Config(e.to_string())
    }
}

impl From<GeometryError> for RunnerError {
    fn from(e: GeometryError) -> Self {
        RunnerError::Config(e.to_string())
    }
}

impl From<MomentsError> for RunnerError {
    fn from(e: MomentsError) -> Self {
        match e {
            MomentsError::Score(s) => s.into(),
            MomentsError::InsufficientReplicates { .. } | MomentsError::InvalidBinning(_) => {
                RunnerError::Config(e.to_string())
            }
            _ => RunnerError::Numeric(e.to_string()),
        }
    }
}

impl From<CumulantError> for RunnerError {
    fn from(e: CumulantError) -> Self {
        match e {
            CumulantError::Degenerate | CumulantError::Sampling(_) => {
                RunnerError::Numeric(e.to_string())
            }
            _ => RunnerError::Config(e.to_string()),
        }
    }
}

/// Stream of replicate i at window volume n: the seed is mixed with n, the
/// stream id is i itself.
pub fn replicate_stream(seed: u64, n: f64, replicate: u64) -> RngStream {
    RngStream::new(splitmix(seed ^ n.to_bits()), replicate)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub results: ResultSet,
    pub summary: Summary,
    /// m₂ profile at the largest window.
    pub m2: Option<MomentEstimate>,
    /// Ursell decay scans per order p.
    pub decay: Vec<(usize, Vec<DecayPoint>)>,
}

struct Replicate {
    values: Vec<(Statistic, f64)>,
    overruns: usize,
    scored: Option<ScoredSample>,
}

fn replicate(
    spec: &ExperimentSpec,
    score: &dyn ScoreFunction<f64>,
    stats: &[Statistic],
    n: f64,
    i: u64,
    keep: bool,
) -> Result<Replicate, RunnerError> {
    let rho = spec.rho_max();
    let window = Window::new(n, spec.dim)?;
    let cfg = spec.process.sample::<f64>(
        &window,
        rho,
        replicate_stream(spec.seed, n, i),
        &spec.limits,
    )?;
    let mut values = Vec::with_capacity(stats.len());
    let mut overruns = 0;
    let mut scored = None;
    if stats.contains(&Statistic::H) || stats.contains(&Statistic::MuF) {
        let wm = WeightedMeasure::new(score, &cfg)?;
        for s in stats {
            match s {
                Statistic::H => values.push((*s, wm.total_mass())),
                Statistic::MuF => values.push((*s, wm.integral(|x| spec.test_function.eval(x)))),
                Statistic::HHat => {}
            }
        }
    }
    if stats.contains(&Statistic::HHat) || keep {
        let (b, v) = buffered_scores(score, &cfg, rho)?;
        overruns = b.overruns;
        if stats.contains(&Statistic::HHat) {
            values.push((Statistic::HHat, v.iter().fold(0.0, |a, b| a + b)));
        }
        if keep {
            let ids = cfg.window_indices();
            scored = Some(ScoredSample {
                points: ids.iter().map(|&j| cfg.points()[j]).collect(),
                scores: v,
                window,
                overruns: b.overruns,
            });
        }
    }
    values.sort_by_key(|v| v.0);
    Ok(Replicate {
        values,
        overruns,
        scored,
    })
}

/// Runs the experiment. Jobs are the (n, replicate) pairs, evaluated in
/// parallel and reassembled in key order, so the output does not depend on
/// scheduling or on which other replicates were requested.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput, RunnerError> {
    spec.validate()?;
    let score = spec.score.build::<f64>()?;
    let stats = spec.statistics();
    let want_m2 = spec.wants(Output::M2Profile);
    let last = spec.ladder.len() - 1;
    let mut jobs: Vec<(usize, u64)> = Vec::new();
    if !stats.is_empty() || want_m2 {
        for (a, _) in spec.ladder.iter().enumerate() {
            if stats.is_empty() && a != last {
                continue;
            }
            jobs.extend((0..spec.replicates as u64).map(|i| (a, i)));
        }
    }
    let reps: Vec<Replicate> = jobs
        .par_iter()
        .map(|&(a, i)| {
            replicate(
                spec,
                score.as_ref(),
                &stats,
                spec.ladder[a],
                i,
                want_m2 && a == last,
            )
        })
        .collect::<Result<_, _>>()?;

    let provenance = Provenance {
        spec_hash: spec.hash(),
        seed: spec.seed,
        version: VERSION.to_string(),
    };
    let mut rows = Vec::with_capacity(jobs.len() * stats.len());
    for (&(a, i), r) in jobs.iter().zip(&reps) {
        rows.extend(r.values.iter().map(|&(statistic, value)| Row {
            n: spec.ladder[a],
            replicate: i,
            statistic,
            value,
        }));
    }
    let results = ResultSet::new(provenance, rows);
    let mut summary = Summary::from_results(&results)?;
    if stats.contains(&Statistic::HHat) || want_m2 {
        summary.overruns = Some(reps.iter().map(|r| r.overruns).sum());
    }

    let mut m2 = None;
    if want_m2 {
        let samples: Vec<ScoredSample> = reps.into_iter().filter_map(|r| r.scored).collect();
        let est = m2_from_samples(&samples, spec.m2.delta, spec.m2.s_max)?;
        match (sigma_sq_plugin(&est), sigma_sq_surface(&est)) {
            (Ok(p), Ok(s)) => summary = summary.with_variances(spec.ladder[last], p, s),
            (Err(e), _) | (_, Err(e)) => summary.notes.push(format!("sigma_sq: {e}")),
        }
        m2 = Some(est);
    }

    let mut decay = Vec::new();
    if spec.wants(Output::DecayCurve) {
        let alpha = match spec.process {
            ProcessSpec::Ginibre => -1.0,
            _ => 0.0,
        };
        let kernel = GinibreKernel::unit_intensity();
        let diam = spec.decay.diameters();
        for &p in &spec.decay.orders {
            let seed = splitmix(spec.seed ^ p as u64);
            decay.push((
                p,
                ursell_decay_scan(&kernel, alpha, p, &diam, spec.decay.samples, seed)?,
            ));
        }
    }
    Ok(RunOutput {
        results,
        summary,
        m2,
        decay,
    })
}

fn io(path: &Path, e: impl std::fmt::Display) -> RunnerError {
    RunnerError::Io(format!("{}: {e}", path.display()))
}

fn write_csv_file(
    path: &Path,
    f: impl FnOnce(std::fs::File) -> csv::Result<()>,
) -> Result<(), RunnerError> {
    let file = std::fs::File::create(path).map_err(|e| io(path, e))?;
    f(file).map_err(|e| io(path, e))
}

pub fn write_decay_csv<W: std::io::Write>(
    decay: &[(usize, Vec<DecayPoint>)],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "diameter", "max_abs", "envelope"])?;
    for (p, pts) in decay {
        for q in pts {
            w.write_record([
                p.to_string(),
                q.diameter.to_string(),
                q.max_abs.to_string(),
                q.envelope.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.<ext>` (merged into an existing file of the same spec
/// hash), `results.summary`, and the profile, ladder and decay CSVs that were
/// requested. Returns the paths written.
pub fn write_outputs(
    out: &RunOutput,
    dir: &Path,
    format: Format,
) -> Result<Vec<PathBuf>, RunnerError> {
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    let results_path = dir.join(format!("results.{}", format.extension()));
    let merged = out.results.append(format, &results_path)?;
    written.push(results_path.clone());
    let summary = if merged == out.results {
        out.summary.clone()
    } else {
        let mut s = Summary::from_results(&merged)?;
        s.overruns = out.summary.overruns;
        s.sigma_sq = out.summary.sigma_sq;
        s.notes.extend(out.summary.notes.iter().cloned());
        s
    };
    let sp = summary_path(&results_path);
    summary.write(&sp)?;
    written.push(sp);
    if let Some(m2) = &out.m2 {
        let p = dir.join("m2_profile.csv");
        write_csv_file(&p, |f| m2.write_csv(f))?;
        written.push(p);
    }
    if let Some(l) = &summary.ladder {
        let p = dir.join("cumulant_ladder.csv");
        write_csv_file(&p, |f| l.write_csv(f))?;
        written.push(p);
    }
    if !out.decay.is_empty() {
        let p = dir.join("decay_curve.csv");
        write_csv_file(&p, |f| write_decay_csv(&out.decay, f))?;
        written.push(p);
    }
    Ok(written)
}
