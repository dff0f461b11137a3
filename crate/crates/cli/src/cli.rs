//! Command-line parsing and dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sfts_core::lattice::{expand_candidates, sparsity_bounds, LatticeBasis};

use crate::config::{ExperimentConfig, Mode, NoiseModel, Task};
use crate::output::{csv_string, summary_json, write_outputs};
use crate::run::run;

#[derive(Debug, Parser)]
#[command(name = "sfts", version, about = "Sparse Fourier transform experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discrete set query on [p]^d with a random tail.
    Setquery(RunArgs),
    /// 1-D estimation from perturbed frequency estimates.
    Estimate1d(RunArgs),
    /// d-dimensional estimation on the grid lattice.
    Estimatehd(RunArgs),
    /// Sketch distillation; writes each distilled sample set.
    Distill(RunArgs),
    /// Quadratic-form trees against brute force.
    QsampleBench(RunArgs),
    /// Peak-to-average energy ratios.
    EnergyCheck(RunArgs),
    /// Grid snapping error and its monotonicity in the pitch.
    Snap(RunArgs),
    /// Lattice utilities.
    Lattice {
        #[command(subcommand)]
        command: LatticeCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum LatticeCommand {
    /// Lattice points within `radius` of each frequency estimate.
    Expand {
        /// Basis JSON: {"columns": [[...], ...]}.
        #[arg(long)]
        basis: PathBuf,
        /// Frequency estimates: [[...], ...].
        #[arg(long)]
        freqs: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config; its keys override the task defaults and flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output directory for trials.csv and summary.json. Without it the CSV
    /// goes to stdout and the summary to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the wall_ms column (makes the CSV timing-dependent).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub band: Option<f64>,
    /// Signal-to-noise ratio; `inf` for noiseless.
    #[arg(long)]
    pub snr: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub tail: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseModel>,
    /// Required pass rate.
    #[arg(long)]
    pub threshold: Option<f64>,
}

impl RunArgs {
    pub fn resolve(&self, task: Task) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(task, self.config.as_deref())?;
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(seed, trials, k, p, d, n, horizon, eta, band, eps, radius, tail, mode, noise, threshold);
        if let Some(s) = &self.snr {
            cfg.snr = match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "none" => None,
                other => Some(other.parse().with_context(|| format!("--snr {s:?} is not a number"))?),
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs a task; `Ok(false)` means the pass-rate threshold was missed.
pub fn run_task(task: Task, args: &RunArgs) -> Result<bool> {
    let cfg = args.resolve(task)?;
    let result = run(&cfg, args.timing)?;
    match &args.out {
        Some(dir) => {
            write_outputs(dir, &result)?;
            print!("{}", summary_json(&result.summary)?);
        }
        None => {
            print!("{}", csv_string(&result.rows)?);
            eprint!("{}", summary_json(&result.summary)?);
        }
    }
    std::io::stdout().flush()?;
    Ok(result.summary.passed)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn lattice_expand(basis: &Path, freqs: &Path, radius: f64, out: Option<&Path>) -> Result<()> {
    if !(radius >= 0.0) {
        bail!("radius must be nonnegative");
    }
    let basis: LatticeBasis = read_json(basis)?;
    let sources: Vec<Vec<f64>> = read_json(freqs)?;
    let set = expand_candidates(&basis, &sources, radius)?;
    let mut value = serde_json::to_value(&set)?;
    value["bounds"] = serde_json::to_value(sparsity_bounds(&basis, sources.len(), radius))?;
    let text = serde_json::to_string_pretty(&value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Exit code 0 when the run passed, 2 on a threshold miss, 1 on error.
pub fn main_with(cli: Cli) -> ExitCode {
    let outcome = match &cli.command {
        Command::Setquery(a) => run_task(Task::Setquery, a),
        Command::Estimate1d(a) => run_task(Task::Estimate1d, a),
        Command::Estimatehd(a) => run_task(Task::Estimatehd, a),
        Command::Distill(a) => run_task(Task::Distill, a),
        Command::QsampleBench(a) => run_task(Task::QsampleBench, a),
        Command::EnergyCheck(a) => run_task(Task::EnergyCheck, a),
        Command::Snap(a) => run_task(Task::Snap, a),
        Command::Lattice {
            command:
                LatticeCommand::Expand {
                    basis,
                    freqs,
                    radius,
                    out,
                },
        } => lattice_expand(basis, freqs, *radius, out.as_deref()).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
