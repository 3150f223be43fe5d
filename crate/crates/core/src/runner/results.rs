use super::{RunnerError, Statistic};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: f64,
    pub replicate: u64,
    pub statistic: Statistic,
    pub value: f64,
}

impl Row {
    fn key(&self) -> (u64, u64, Statistic) {
        (self.n.to_bits(), self.replicate, self.statistic)
    }
}

/// Statistic values per (n, replicate), sorted by n, replicate, statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub provenance: Provenance,
    pub rows: Vec<Row>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "jsonl" => Some(Format::Jsonl),
            _ => None,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> RunnerError {
    RunnerError::Io(format!("{}: {e}", path.display()))
}

fn parse_err(path: &Path, line: usize, what: impl std::fmt::Display) -> RunnerError {
    RunnerError::Config(format!("{}:{line}: {what}", path.display()))
}

impl ResultSet {
    pub fn new(provenance: Provenance, mut rows: Vec<Row>) -> Self {
        rows.sort_by(|a, b| {
            a.n.total_cmp(&b.n)
                .then(a.replicate.cmp(&b.replicate))
                .then(a.statistic.cmp(&b.statistic))
        });
        ResultSet { provenance, rows }
    }

    /// Values of one statistic grouped by n, each group in replicate order.
    pub fn series(&self, stat: Statistic) -> Vec<(f64, Vec<f64>)> {
        let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
        for r in self.rows.iter().filter(|r| r.statistic == stat) {
            match out.last_mut() {
                Some((n, v)) if *n == r.n => v.push(r.value),
                _ => out.push((r.n, vec![r.value])),
            }
        }
        out
    }

    pub fn statistics(&self) -> Vec<Statistic> {
        let mut s: Vec<Statistic> = self.rows.iter().map(|r| r.statistic).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> Result<(), RunnerError> {
        let e = |e: std::io::Error| RunnerError::Io(e.to_string());
        match format {
            Format::Csv => {
                let p = &self.provenance;
                writeln!(
                    out,
                    "# pplab {} spec_hash={} seed={}",
                    p.version, p.spec_hash, p.seed
                )
                .map_err(e)?;
                writeln!(out, "n,replicate,statistic,value").map_err(e)?;
                for r in &self.rows {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        r.n,
                        r.replicate,
                        r.statistic.as_str(),
                        r.value
                    )
                    .map_err(e)?;
                }
            }
            Format::Jsonl => {
                let head = serde_json::json!({ "provenance": self.provenance });
                writeln!(out, "{head}").map_err(e)?;
                for r in &self.rows {
                    writeln!(out, "{}", serde_json::to_string(r).expect("rows serialize"))
                        .map_err(e)?;
                }
            }
        }
        out.flush().map_err(e)
    }

    /// Writes (or overwrites) `path`.
    pub fn emit(&self, format: Format, path: &Path) -> Result<(), RunnerError> {
        let f = fs::File::create(path).map_err(|e| io(path, e))?;
        self.write(format, std::io::BufWriter::new(f))
            .map_err(|e| match e {
                RunnerError::Io(m) => io(path, m),
                other => other,
            })
    }

    /// Merges into an existing file written from the same spec hash, or
    /// creates it. Rows already present must carry identical values.
    pub fn append(&self, format: Format, path: &Path) -> Result<ResultSet, RunnerError> {
        if !path.exists() {
            self.emit(format, path)?;
            return Ok(self.clone());
        }
        let old = ResultSet::read(path)?;
        if old.provenance.spec_hash != self.provenance.spec_hash {
            return Err(RunnerError::HashMismatch {
                path: path.display().to_string(),
                existing: old.provenance.spec_hash,
                new: self.provenance.spec_hash.clone(),
            });
        }
        let mut merged: BTreeMap<(u64, u64, Statistic), Row> =
            old.rows.iter().map(|r| (r.key(), *r)).collect();
        for r in &self.rows {
            if let Some(prev) = merged.insert(r.key(), *r) {
                if prev.value.to_bits() != r.value.to_bits() {
                    return Err(RunnerError::Numeric(format!(
                        "n = {}, replicate {}, {}: stored {} but recomputed {}",
                        r.n,
                        r.replicate,
                        r.statistic.as_str(),
                        prev.value,
                        r.value
                    )));
                }
            }
        }
        let out = ResultSet::new(self.provenance.clone(), merged.into_values().collect());
        out.emit(format, path)?;
        Ok(out)
    }

    /// Reads either format; a leading `{` marks jsonl.
    pub fn read(path: &Path) -> Result<ResultSet, RunnerError> {
        let f = fs::File::open(path).map_err(|e| io(path, e))?;
        let mut lines = BufReader::new(f).lines().enumerate();
        let (_, first) = lines
            .next()
            .ok_or_else(|| parse_err(path, 1, "empty results file"))?;
        let first = first.map_err(|e| io(path, e))?;
        let mut rows = Vec::new();
        let provenance = if first.starts_with('{') {
            #[derive(Deserialize)]
            struct Head {
                provenance: Provenance,
            }
            let head: Head = serde_json::from_str(&first).map_err(|e| parse_err(path, 1, e))?;
            for (i, line) in lines {
                let line = line.map_err(|e| io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                rows.push(serde_json::from_str(&line).map_err(|e| parse_err(path, i + 1, e))?);
            }
            head.provenance
        } else {
            let prov = parse_csv_head(&first)
                .ok_or_else(|| parse_err(path, 1, "missing provenance line"))?;
            match lines.next() {
                Some((_, Ok(h))) if h.trim() == "n,replicate,statistic,value" => {}
                _ => {
                    return Err(parse_err(
                        path,
                        2,
                        "expected header n,replicate,statistic,value",
                    ))
                }
            }
            for (i, line) in lines {
                let line = line.map_err(|e| io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                rows.push(
                    parse_csv_row(&line)
                        .ok_or_else(|| parse_err(path, i + 1, format!("bad row `{line}`")))?,
                );
            }
            prov
        };
        Ok(ResultSet::new(provenance, rows))
    }
}

fn parse_csv_head(line: &str) -> Option<Provenance> {
    let mut f = line.strip_prefix("# pplab ")?.split_whitespace();
    let version = f.next()?.to_string();
    let spec_hash = f.next()?.strip_prefix("spec_hash=")?.to_string();
    let seed = f.next()?.strip_prefix("seed=")?.parse().ok()?;
    Some(Provenance {
        spec_hash,
        seed,
        version,
    })
}

fn parse_csv_row(line: &str) -> Option<Row> {
    let f: Vec<&str> = line.trim().split(',').collect();
    if f.len() != 4 {
        return None;
    }
    Some(Row {
        n: f[0].parse().ok()?,
        replicate: f[1].parse().ok()?,
        statistic: Statistic::parse(f[2])?,
        value: f[3].parse().ok()?,
    })
}
