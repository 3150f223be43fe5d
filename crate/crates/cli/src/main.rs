use clap::{Parser, Subcommand, ValueEnum};
use pplab::cumulants::{cumulants_from_moments, moments_from_cumulants};
use pplab::geometry::{miniball, miniball_exhaustive, Point, Window};
use pplab::processes::{ginibre_disk_count_pmf, PointConfiguration};
use pplab::runner::{
    replicate_stream, run, summary_path, write_outputs, ExperimentSpec, Format, ResultSet,
    RunnerError, Statistic, Summary,
};
use pplab::scores::buffered_scores;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "pplab",
    version,
    about = "Point-process experiments: sampling, scoring, moment and cumulant diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; stdout where a command allows it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw one configuration of the config's process (with its buffer).
    Sample {
        /// Window volume; defaults to the first ladder entry.
        #[arg(long)]
        n: Option<f64>,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
    },
    /// Per-point scores of a configuration written by `sample`.
    Score {
        /// Points file.
        points: PathBuf,
    },
    /// Run the configured experiment and write results, summary and profiles.
    Experiment,
    /// Recompute the summary of a results file.
    Analyze {
        /// Results file; defaults to results.<format> in --out.
        results: Option<PathBuf>,
    },
    /// Quick numerical self-checks.
    Selftest,
}

fn load_spec(cli: &Cli) -> Result<ExperimentSpec, RunnerError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| RunnerError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))?;
    let mut spec = ExperimentSpec::from_toml(&text)?;
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    Ok(spec)
}

fn io(path: &Path, e: impl std::fmt::Display) -> RunnerError {
    RunnerError::Io(format!("{}: {e}", path.display()))
}

/// Writes to `<out>/<name>` when --out is set, else to stdout.
fn emit_text(out: &Option<PathBuf>, name: &str, text: &str) -> Result<(), RunnerError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| io(&p, e))?;
            println!("{}", p.display());
            Ok(())
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| RunnerError::Io(e.to_string())),
    }
}

fn sample(cli: &Cli, n: Option<f64>, replicate: u64) -> Result<(), RunnerError> {
    let spec = load_spec(cli)?;
    let n = n.unwrap_or(spec.ladder[0]);
    let window = Window::new(n, spec.dim)?;
    let cfg: PointConfiguration<f64> = spec.process.sample(
        &window,
        spec.rho_max(),
        replicate_stream(spec.seed, n, replicate),
        &spec.limits,
    )?;
    emit_text(&cli.out, "sample.txt", &cfg.to_text())
}

fn score(cli: &Cli, points: &Path) -> Result<(), RunnerError> {
    let spec = load_spec(cli)?;
    let text = std::fs::read_to_string(points).map_err(|e| io(points, e))?;
    let cfg = PointConfiguration::<f64>::from_text(&text)?;
    let score = spec.score.build::<f64>()?;
    let (b, vals) = buffered_scores(score.as_ref(), &cfg, 0.0)?;
    if cfg.margin() < spec.rho_max() {
        eprintln!(
            "warning: buffer margin {} is below rho_max {}",
            cfg.margin(),
            spec.rho_max()
        );
    }
    let names = ["x", "y", "z"];
    let d = cfg.dim();
    let mut s = names[..d].join(",") + ",score\n";
    for (&i, v) in cfg.window_indices().iter().zip(&vals) {
        let c: Vec<String> = cfg.points()[i]
            .coords()
            .iter()
            .map(|x| x.to_string())
            .collect();
        s.push_str(&format!("{},{v}\n", c.join(",")));
    }
    eprintln!(
        "H_hat = {}, window points = {}, overruns = {}",
        vals.iter().sum::<f64>(),
        b.window_points,
        b.overruns
    );
    emit_text(&cli.out, "scores.csv", &s)
}

fn experiment(cli: &Cli) -> Result<(), RunnerError> {
    let spec = load_spec(cli)?;
    let out = run(&spec)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    for p in write_outputs(&out, &dir, cli.format.into())? {
        println!("{}", p.display());
    }
    for n in &out.summary.notes {
        eprintln!("note: {n}");
    }
    Ok(())
}

fn analyze(cli: &Cli, results: &Option<PathBuf>) -> Result<(), RunnerError> {
    let fmt: Format = cli.format.into();
    let path = match results {
        Some(p) => p.clone(),
        None => cli
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
            .join(format!("results.{}", fmt.extension())),
    };
    let rs = ResultSet::read(&path)?;
    if cli.config.is_some() {
        let spec = load_spec(cli)?;
        if spec.hash() != rs.provenance.spec_hash {
            return Err(RunnerError::Config(format!(
                "{} was written from spec {}, the config hashes to {}",
                path.display(),
                rs.provenance.spec_hash,
                spec.hash()
            )));
        }
    }
    let mut summary = Summary::from_results(&rs)?;
    let sp = summary_path(&path);
    // overrun counts and σ² are not recoverable from the rows; keep them from
    // the summary the experiment wrote
    if let Some(old) = std::fs::read_to_string(&sp)
        .ok()
        .and_then(|t| toml::from_str::<Summary>(&t).ok())
    {
        if old.provenance == summary.provenance {
            summary.overruns = old.overruns;
            summary.sigma_sq = old.sigma_sq;
        }
    }
    summary.write(&sp)?;
    if let Some(l) = &summary.ladder {
        let lp = sp.with_file_name("cumulant_ladder.csv");
        let f = std::fs::File::create(&lp).map_err(|e| io(&lp, e))?;
        l.write_csv(f).map_err(|e| io(&lp, e))?;
    }
    print!("{}", summary.to_toml());
    Ok(())
}

type Check = (&'static str, Box<dyn Fn() -> Result<(), String>>);

fn selftest(cli: &Cli) -> Result<(), RunnerError> {
    let seed = cli.seed.unwrap_or(1);
    let checks: Vec<Check> = vec![
        (
            "ginibre disk-count pmf sums to one",
            Box::new(|| {
                let p = ginibre_disk_count_pmf(2.0, 60).map_err(|e| e.to_string())?;
                let s: f64 = p.iter().sum();
                ((s - 1.0).abs() < 1e-10)
                    .then_some(())
                    .ok_or(format!("sum {s}"))
            }),
        ),
        (
            "cumulant round trip",
            Box::new(|| {
                let k: [f64; 6] = [0.3, 1.2, -0.4, 2.0, 0.7, -1.1];
                let back =
                    cumulants_from_moments(&moments_from_cumulants(&k).map_err(|e| e.to_string())?)
                        .map_err(|e| e.to_string())?;
                k.iter()
                    .zip(&back)
                    .all(|(a, b)| (a - b).abs() < 1e-10)
                    .then_some(())
                    .ok_or(format!("{back:?}"))
            }),
        ),
        (
            "miniball agrees with exhaustive search",
            Box::new(|| {
                let pts: Vec<Point<f64>> =
                    [(0.0, 0.0), (1.0, 0.2), (0.4, 0.9), (0.5, 0.4), (-0.2, 0.6)]
                        .iter()
                        .map(|&(x, y)| Point::xy(x, y))
                        .collect();
                let a = miniball(&pts).map_err(|e| e.to_string())?;
                let b = miniball_exhaustive(&pts).map_err(|e| e.to_string())?;
                ((a.radius - b.radius).abs() < 1e-12)
                    .then_some(())
                    .ok_or(format!("{} vs {}", a.radius, b.radius))
            }),
        ),
        (
            "poisson edge-length mean matches pi/24",
            Box::new(move || {
                let text = format!(
                    "seed = {seed}\nladder = [100.0]\nreplicates = 200\noutputs = [\"H_hat\"]\n\
                     [process]\nkind = \"poisson\"\nintensity = 1.0\n[score]\nscore = \"edge_length\"\nr = 0.5\n"
                );
                let spec = ExperimentSpec::from_toml(&text).map_err(|e| e.to_string())?;
                let out = run(&spec).map_err(|e| e.to_string())?;
                let v: Vec<f64> = out.results.series(Statistic::HHat)[0]
                    .1
                    .iter()
                    .map(|h| h / 100.0)
                    .collect();
                let m = v.iter().sum::<f64>() / v.len() as f64;
                let se = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>()
                    / (v.len() as f64 - 1.0)
                    / v.len() as f64)
                    .sqrt();
                let want = std::f64::consts::PI / 24.0;
                ((m - want).abs() < 4.0 * se)
                    .then_some(())
                    .ok_or(format!("{m} ± {se} vs {want}"))
            }),
        ),
    ];
    let mut failed = Vec::new();
    for (name, check) in &checks {
        match check() {
            Ok(()) => println!("ok    {name}"),
            Err(e) => {
                println!("FAIL  {name}: {e}");
                failed.push(*name);
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(RunnerError::Numeric(format!(
            "{} self-check(s) failed",
            failed.len()
        )))
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("pplab: {e}");
            std::process::exit(2);
        }
    }
    let res = match &cli.cmd {
        Cmd::Sample { n, replicate } => sample(&cli, *n, *replicate),
        Cmd::Score { points } => score(&cli, points),
        Cmd::Experiment => experiment(&cli),
        Cmd::Analyze { results } => analyze(&cli, results),
        Cmd::Selftest => selftest(&cli),
    };
    if let Err(e) = res {
        eprintln!("pplab: {e}");
        std::process::exit(e.exit_code());
    }
}
