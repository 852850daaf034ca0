//! Command dispatch.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use selectnet::{run_trials, train, FnField, OperatorConfig, Problem, RunResult, TrainConfig, TrainError, TrialStats};

use crate::artifacts::{
    metadata_toml, read_metadata, write_curve, write_stats, write_trials, RunManifest, RunMetadata, RunStatus,
    SavedParams, CURVE_FILE, METADATA_FILE, PARAMS_FILE, STATS_FILE, TRIALS_FILE,
};
use crate::config::load_experiment;
use crate::slice::{residual_values, selection_values, slice_grid, write_slice, Plane};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "selectnet", version, about = "Train and inspect selection-network PDE solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train once and write the error curve, parameters and metadata.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate a finished run on a two-dimensional grid.
    Slice {
        /// Output directory of a previous `run`.
        run_dir: PathBuf,
        #[arg(long, default_value = "x1x2")]
        plane: Plane,
        /// Points per axis.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Where to write the slices; the run directory by default.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Train every method of the `[compare]` section over several seeds.
    Compare {
        config: PathBuf,
        /// Overrides the trial count of the config file.
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub time_budget_seconds: Option<f64>,
}

impl Overrides {
    fn apply(&self, c: &mut TrainConfig) {
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(b) = self.time_budget_seconds {
            c.time_budget_seconds = Some(b);
        }
    }
}

/// Why a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Diverged { iteration: usize },
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Diverged { .. } => EXIT_DIVERGED,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Diverged { iteration } => write!(f, "training diverged at iteration {iteration}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

fn io(e: anyhow::Error) -> Failure {
    Failure::Io(e)
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, overrides } => run_command(&config, &overrides).map(|_| ()),
        Command::Slice {
            run_dir,
            plane,
            grid,
            out_dir,
        } => slice_command(&run_dir, plane, grid, out_dir.as_deref()),
        Command::Compare {
            config,
            trials,
            overrides,
        } => compare_command(&config, trials, &overrides).map(|_| ()),
    }
}

fn resolve(config_path: &Path, overrides: &Overrides) -> Result<(crate::config::ExperimentFile, Problem), Failure> {
    let mut exp = load_experiment(config_path).map_err(Failure::Config)?;
    overrides.apply(&mut exp.train);
    exp.train.validate().map_err(|e| Failure::Config(e.into()))?;
    let problem = exp.train.make_problem::<f64>().map_err(|e| Failure::Config(e.into()))?;
    Ok((exp, problem))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(io)
}

fn write_run_artifacts(run: &RunResult<f64>, status: RunStatus, dir: &Path, manifest: &mut RunManifest) -> Result<()> {
    write_curve(BufWriter::new(File::create(dir.join(CURVE_FILE))?), &run.records)?;
    manifest.push(CURVE_FILE);
    let meta = RunMetadata::from_run(run, status);
    fs::write(dir.join(METADATA_FILE), metadata_toml(&meta, &run.config)?)?;
    manifest.push(METADATA_FILE);
    fs::write(dir.join(PARAMS_FILE), serde_json::to_string(&SavedParams::from_run(run))?)?;
    manifest.push(PARAMS_FILE);
    manifest.save(dir)
}

/// Trains once. Artifacts are written even when the run diverges.
pub fn run_command(config_path: &Path, overrides: &Overrides) -> Result<RunResult<f64>, Failure> {
    let (exp, problem) = resolve(config_path, overrides)?;
    let dir = &overrides.out_dir;
    create_dir(dir)?;
    let mut manifest = RunManifest {
        command: "run".into(),
        config_path: Some(config_path.to_path_buf()),
        output_dir: dir.clone(),
        artifacts: Vec::new(),
    };
    match train(&exp.train, &problem) {
        Ok(run) => {
            let status = if run.stopped_by_budget {
                RunStatus::TimeBudget
            } else {
                RunStatus::Completed
            };
            write_run_artifacts(&run, status, dir, &mut manifest).map_err(io)?;
            Ok(run)
        }
        Err(TrainError::Diverged { iteration, partial }) => {
            write_run_artifacts(&partial, RunStatus::Diverged, dir, &mut manifest).map_err(io)?;
            Err(Failure::Diverged { iteration })
        }
        Err(TrainError::Config(e)) => Err(Failure::Config(e.into())),
    }
}

pub fn slice_command(run_dir: &Path, plane: Plane, grid: usize, out_dir: Option<&Path>) -> Result<(), Failure> {
    let (_, config) = read_metadata(&run_dir.join(METADATA_FILE)).map_err(Failure::Config)?;
    let params: SavedParams = fs::read_to_string(run_dir.join(PARAMS_FILE))
        .map_err(anyhow::Error::from)
        .and_then(|t| Ok(serde_json::from_str(&t)?))
        .map_err(Failure::Config)?;
    let problem: Problem = config.make_problem().map_err(|e| Failure::Config(e.into()))?;
    let g = slice_grid(&problem, plane, grid).map_err(Failure::Config)?;
    let op = OperatorConfig::new(config.h).map_err(|e| Failure::Config(e.into()))?;

    let dir = out_dir.unwrap_or(run_dir);
    create_dir(dir)?;
    let mut manifest = RunManifest::load(dir).unwrap_or_else(|_| RunManifest {
        command: "slice".into(),
        config_path: None,
        output_dir: dir.to_path_buf(),
        artifacts: Vec::new(),
    });

    let solution = params.solution.forward(g.points.view()).map_err(|e| io(e.into()))?;
    let residual = residual_values(&problem, &params.solution, &g.points, &op).map_err(io)?;
    let mut outputs = vec![("solution", solution), ("residual", residual)];
    if let Some(sel) = &params.interior_selection {
        outputs.push(("selection", selection_values(sel, &g.points).map_err(io)?));
    }
    for (what, values) in outputs {
        let name = format!("slice_{plane}_{what}.csv");
        let file = File::create(dir.join(&name))
            .with_context(|| format!("cannot create {name}"))
            .map_err(io)?;
        write_slice(BufWriter::new(file), &g.coords, &values).map_err(io)?;
        manifest.push(&name);
    }
    manifest.save(dir).map_err(io)
}

/// Solution of the exact stand-in on a slice grid, for reference plots.
pub fn exact_slice(problem: &Problem, plane: Plane, grid: usize) -> Result<(Vec<(f64, f64)>, ndarray::Array1<f64>)> {
    let g = slice_grid(problem, plane, grid)?;
    let exact = problem.exact.clone();
    let field = FnField::new(problem.input_dim(), move |x: &[f64]| exact(x));
    let values = selectnet::Field::evaluate(&field, g.points.view())?;
    Ok((g.coords, values))
}

pub fn compare_command(
    config_path: &Path,
    trials: Option<usize>,
    overrides: &Overrides,
) -> Result<Vec<(selectnet::Method, TrialStats)>, Failure> {
    let (exp, problem) = resolve(config_path, overrides)?;
    let spec = exp
        .compare
        .clone()
        .ok_or_else(|| Failure::Config(anyhow!("compare needs a [compare] section with a method list")))?;
    let trials = trials.unwrap_or(spec.trials);
    if trials == 0 {
        return Err(Failure::Config(anyhow!("trial count must be at least 1")));
    }
    let base_seed = overrides.seed.or(spec.base_seed).unwrap_or(exp.train.seed);
    for &method in &spec.methods {
        let mut c = exp.train.clone();
        c.method = method;
        c.validate().map_err(|e| Failure::Config(e.into()))?;
    }
    let dir = &overrides.out_dir;
    create_dir(dir)?;

    let mut rows = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let mut c = exp.train.clone();
        c.method = method;
        match run_trials(&c, &problem, trials, base_seed) {
            Ok(stats) => rows.push((method, stats)),
            Err(TrainError::Diverged { iteration, .. }) => return Err(Failure::Diverged { iteration }),
            Err(TrainError::Config(e)) => return Err(Failure::Config(e.into())),
        }
    }
    let mut manifest = RunManifest {
        command: "compare".into(),
        config_path: Some(config_path.to_path_buf()),
        output_dir: dir.clone(),
        artifacts: Vec::new(),
    };
    let write = || -> Result<()> {
        write_stats(BufWriter::new(File::create(dir.join(STATS_FILE))?), &rows)?;
        write_trials(BufWriter::new(File::create(dir.join(TRIALS_FILE))?), &rows, base_seed)?;
        Ok(())
    };
    write().map_err(io)?;
    manifest.push(STATS_FILE);
    manifest.push(TRIALS_FILE);
    manifest.save(dir).map_err(io)?;
    Ok(rows)
}
