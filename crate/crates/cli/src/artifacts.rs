//! Files written by the commands.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use selectnet::{Method, RunResult, SelectionNetwork, SolutionAnsatz, TrainConfig, TrainRecord, TrialStats};
use serde::{Deserialize, Serialize};

use crate::config::config_table;

pub const CURVE_FILE: &str = "curve.csv";
pub const METADATA_FILE: &str = "metadata.toml";
pub const PARAMS_FILE: &str = "params.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const STATS_FILE: &str = "stats.csv";
pub const TRIALS_FILE: &str = "trials.csv";

pub const CURVE_HEADER: [&str; 7] = [
    "iteration",
    "seconds",
    "loss_interior",
    "loss_boundary",
    "loss_penalty",
    "rel_l2_error",
    "lr",
];
pub const STATS_HEADER: [&str; 5] = ["method", "trials", "mean_error", "stdev", "cv"];
pub const TRIALS_HEADER: [&str; 3] = ["method", "seed", "final_error"];

/// 17 significant digits, enough to recover every `f64` exactly.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row of the error curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub iteration: usize,
    pub seconds: f64,
    pub loss_interior: f64,
    pub loss_boundary: f64,
    pub loss_penalty: f64,
    pub rel_l2_error: f64,
    pub lr: f64,
}

impl From<&TrainRecord> for CurveRow {
    fn from(r: &TrainRecord) -> Self {
        CurveRow {
            iteration: r.iteration,
            seconds: r.seconds,
            loss_interior: r.loss_interior,
            loss_boundary: r.loss_boundary,
            loss_penalty: r.loss_penalty,
            rel_l2_error: r.rel_l2_error,
            lr: r.lr,
        }
    }
}

pub fn write_curve<W: Write>(out: W, records: &[TrainRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for r in records {
        w.write_record([
            r.iteration.to_string(),
            fmt_real(r.seconds),
            fmt_real(r.loss_interior),
            fmt_real(r.loss_boundary),
            fmt_real(r.loss_penalty),
            fmt_real(r.rel_l2_error),
            fmt_real(r.lr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve<R: Read>(input: R) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(CURVE_HEADER) {
        bail!("unexpected curve header {:?}", r.headers()?);
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> { Ok(rec[i].parse::<f64>()?) };
        rows.push(CurveRow {
            iteration: rec[0].parse()?,
            seconds: f(1)?,
            loss_interior: f(2)?,
            loss_boundary: f(3)?,
            loss_penalty: f(4)?,
            rel_l2_error: f(5)?,
            lr: f(6)?,
        });
    }
    Ok(rows)
}

/// Per-method summary rows plus the individual trial errors.
pub fn write_stats<W: Write>(out: W, rows: &[(Method, TrialStats)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STATS_HEADER)?;
    for (method, s) in rows {
        w.write_record([
            method.as_str().to_string(),
            s.errors.len().to_string(),
            fmt_real(s.mean),
            fmt_real(s.stdev),
            fmt_real(s.cv),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trials<W: Write>(out: W, rows: &[(Method, TrialStats)], base_seed: u64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIALS_HEADER)?;
    for (method, s) in rows {
        for (i, e) in s.errors.iter().enumerate() {
            w.write_record([method.as_str().to_string(), (base_seed + i as u64).to_string(), fmt_real(*e)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Trained parameters of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavedParams {
    pub solution: SolutionAnsatz<f64>,
    pub interior_selection: Option<SelectionNetwork<f64>>,
    pub boundary_selection: Option<SelectionNetwork<f64>>,
}

impl SavedParams {
    pub fn from_run(run: &RunResult<f64>) -> Self {
        SavedParams {
            solution: run.solution.clone(),
            interior_selection: run.selection.as_ref().map(|s| s.interior.clone()),
            boundary_selection: run.selection.as_ref().map(|s| s.boundary.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    TimeBudget,
    Diverged,
}

/// Run summary stored next to the effective configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub status: RunStatus,
    pub seed: u64,
    pub rng_algorithm: String,
    pub rng_streams: Vec<String>,
    pub build_version: String,
    pub iterations: usize,
    pub final_error: Option<f64>,
}

impl RunMetadata {
    pub fn from_run(run: &RunResult<f64>, status: RunStatus) -> Self {
        RunMetadata {
            status,
            seed: run.rng.seed,
            rng_algorithm: run.rng.algorithm.clone(),
            rng_streams: run.rng.streams.iter().map(|s| format!("{s:?}").to_lowercase()).collect(),
            build_version: env!("CARGO_PKG_VERSION").to_string(),
            iterations: run.iterations,
            final_error: run.final_error(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MetadataFile {
    metadata: RunMetadata,
    config: TrainConfig,
}

pub fn metadata_toml(meta: &RunMetadata, config: &TrainConfig) -> Result<String> {
    let mut doc = toml::Table::new();
    doc.insert("metadata".into(), toml::Value::try_from(meta)?);
    doc.insert("config".into(), toml::Value::Table(config_table(config)?));
    Ok(toml::to_string(&doc)?)
}

pub fn read_metadata(path: &Path) -> Result<(RunMetadata, TrainConfig)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let f: MetadataFile = toml::from_str(&text).with_context(|| format!("in {}", path.display()))?;
    Ok((f.metadata, f.config))
}

/// Every file a command wrote into its output directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn push(&mut self, name: &str) {
        if !self.artifacts.iter().any(|a| a == name) {
            self.artifacts.push(name.to_string());
        }
    }

    /// Writes the manifest, listing itself.
    pub fn save(&mut self, dir: &Path) -> Result<()> {
        self.push(MANIFEST_FILE);
        std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(k: usize, x: f64) -> TrainRecord {
        TrainRecord {
            iteration: k,
            seconds: x * 3.0,
            loss_interior: x / 7.0,
            loss_boundary: 1e-300 * x,
            loss_penalty: 0.0,
            loss_total: x,
            rel_l2_error: std::f64::consts::PI * x,
            lr: 10f64.powf(-5.997),
            lr_selection: 1e-4,
        }
    }

    #[test]
    fn curve_round_trips_exactly() {
        let recs: Vec<_> = (1..20).map(|k| record(k * 100, 1.0 / k as f64)).collect();
        let mut buf = Vec::new();
        write_curve(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("iteration,seconds,loss_interior,loss_boundary,loss_penalty,rel_l2_error,lr\n"));
        let rows = read_curve(&buf[..]).unwrap();
        let expected: Vec<CurveRow> = recs.iter().map(CurveRow::from).collect();
        assert_eq!(rows, expected);
    }

    #[test]
    fn empty_curve_is_just_the_header() {
        let mut buf = Vec::new();
        write_curve(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "iteration,seconds,loss_interior,loss_boundary,loss_penalty,rel_l2_error,lr\n"
        );
    }

    #[test]
    fn stats_layout() {
        let mut buf = Vec::new();
        write_stats(&mut buf, &[(Method::Basic, TrialStats::from_errors(vec![0.5]))]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("method,trials,mean_error,stdev,cv"));
        assert_eq!(
            lines.next(),
            Some("basic,1,5.0000000000000000e-1,0.0000000000000000e0,0.0000000000000000e0")
        );
    }
}
