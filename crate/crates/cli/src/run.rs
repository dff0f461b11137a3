//! Parallel trial execution and summary statistics.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, Task};
use crate::tasks::{check_feasible, run_trial, summary_extra, TrialOutcome};

/// Bumped whenever the CSV columns change.
pub const CSV_VERSION: u32 = 1;
pub const SUMMARY_VERSION: u32 = 1;

/// Columns: `seed,task,k,n,d,eps,snr,ratio,samples,k_tilde,pass,wall_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub seed: u64,
    pub task: String,
    pub k: usize,
    pub n: Option<u64>,
    pub d: usize,
    pub eps: f64,
    /// `inf` for noiseless instances, empty for tasks without noise.
    pub snr: Option<f64>,
    pub ratio: Option<f64>,
    pub samples: u64,
    pub k_tilde: usize,
    pub pass: bool,
    /// Only filled when timing is requested, so default output is reproducible.
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

impl Quantiles {
    /// Nearest-rank quantiles of the finite values; `None` if there are none.
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let at = |q: f64| v[((v.len() - 1) as f64 * q).round() as usize];
        Some(Self {
            min: v[0],
            q10: at(0.1),
            median: at(0.5),
            q90: at(0.9),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialError {
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub summary_version: u32,
    pub csv_version: u32,
    pub task: Task,
    pub seed: u64,
    pub trials: usize,
    pub passed_trials: usize,
    pub pass_rate: f64,
    pub threshold: f64,
    pub passed: bool,
    pub ratio: Option<Quantiles>,
    pub mean_samples: f64,
    pub errors: Vec<TrialError>,
    pub config: ExperimentConfig,
    pub extra: Option<Value>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub rows: Vec<TrialRow>,
    /// Per-trial artifacts keyed by seed, in seed order.
    pub artifacts: Vec<(u64, Value)>,
    pub summary: Summary,
}

/// Worker count from `SFTS_THREADS`, or `None` for the rayon default.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("SFTS_THREADS") {
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .with_context(|| format!("SFTS_THREADS={s:?} is not a worker count"))?;
            if n == 0 {
                bail!("SFTS_THREADS must be at least 1");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn snr_column(cfg: &ExperimentConfig) -> Option<f64> {
    match cfg.task {
        Task::Estimate1d | Task::Estimatehd => Some(cfg.snr.unwrap_or(f64::INFINITY)),
        _ => None,
    }
}

/// Trial `i` runs on seed `seed + i`. A trial that errors counts as a failure
/// and is listed in the summary; infeasible configurations fail up front.
pub fn run(cfg: &ExperimentConfig, timing: bool) -> Result<RunResult> {
    cfg.validate()?;
    check_feasible(cfg)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building worker pool")?;
    let seeds: Vec<u64> = (0..cfg.trials as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
    let outcomes: Vec<(Result<TrialOutcome>, f64)> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let start = Instant::now();
                let out = run_trial(cfg, seed);
                (out, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(seeds.len());
    let mut artifacts = Vec::new();
    let mut errors = Vec::new();
    for (&seed, (outcome, ms)) in seeds.iter().zip(outcomes) {
        let outcome = outcome.unwrap_or_else(|e| {
            errors.push(TrialError {
                seed,
                message: format!("{e:#}"),
            });
            TrialOutcome {
                n: None,
                ratio: None,
                samples: 0,
                k_tilde: 0,
                pass: false,
                artifact: None,
            }
        });
        if let Some(a) = outcome.artifact {
            artifacts.push((seed, a));
        }
        rows.push(TrialRow {
            seed,
            task: cfg.task.name().to_string(),
            k: cfg.k,
            n: outcome.n,
            d: cfg.d,
            eps: cfg.eps,
            snr: snr_column(cfg),
            ratio: outcome.ratio,
            samples: outcome.samples,
            k_tilde: outcome.k_tilde,
            pass: outcome.pass,
            wall_ms: timing.then_some(ms),
        });
    }

    let passed_trials = rows.iter().filter(|r| r.pass).count();
    let pass_rate = passed_trials as f64 / rows.len() as f64;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let mean_samples = rows.iter().map(|r| r.samples as f64).sum::<f64>() / rows.len() as f64;
    let summary = Summary {
        summary_version: SUMMARY_VERSION,
        csv_version: CSV_VERSION,
        task: cfg.task,
        seed: cfg.seed,
        trials: rows.len(),
        passed_trials,
        pass_rate,
        threshold: cfg.threshold,
        passed: pass_rate >= cfg.threshold,
        ratio: Quantiles::of(&ratios),
        mean_samples,
        errors,
        config: cfg.clone(),
        extra: summary_extra(cfg)?,
    };
    Ok(RunResult {
        rows,
        artifacts,
        summary,
    })
}
