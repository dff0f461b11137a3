//! Experiment configuration: per-task defaults, a JSON file overlay, then flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Setquery,
    Estimate1d,
    Estimatehd,
    Distill,
    QsampleBench,
    EnergyCheck,
    Snap,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Setquery => "setquery",
            Task::Estimate1d => "estimate1d",
            Task::Estimatehd => "estimatehd",
            Task::Distill => "distill",
            Task::QsampleBench => "qsample-bench",
            Task::EnergyCheck => "energy-check",
            Task::Snap => "snap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Optimal,
    Accurate,
}

/// How continuous noise is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// Off-lattice tones plus white noise, half the energy each.
    Mixed,
    /// Off-lattice tones with their component in the candidate span removed.
    Orthogonal,
}

/// Test constants standing in for hidden ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Sketch size constant `C`.
    pub c: f64,
    pub rho: f64,
    /// Noise amplification ceiling for distillation.
    pub c_g: f64,
    /// Error-ratio ceiling for `O(1)` guarantees.
    pub ceiling: f64,
    pub candidate_cap: usize,
    /// Set-query sample budget is `sample_factor · k / ε`.
    pub sample_factor: f64,
    /// Peak-to-mean ceiling is `c_e · k²` for 1-D continuous signals.
    pub c_e: f64,
    /// Snapping error ceiling is `c_snap · ε² · ‖x̂‖₁²`.
    pub c_snap: f64,
    /// Accuracy handed to the distiller by the sample-optimal estimators.
    pub distill_eps: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            c: 10.0,
            rho: 0.1,
            c_g: 20.0,
            ceiling: 50.0,
            candidate_cap: 4096,
            sample_factor: 64.0,
            c_e: 20.0,
            c_snap: 10.0,
            distill_eps: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    /// Sparsity (or vector dimension for `qsample-bench`).
    pub k: usize,
    /// Side length of the discrete domain `[p]^d`.
    pub p: usize,
    pub d: usize,
    /// Number of vectors for `qsample-bench`.
    pub n: usize,
    /// Time horizon `T`.
    pub horizon: f64,
    /// Lattice pitch.
    pub eta: f64,
    /// Frequencies are drawn from `[−band, band]^d`.
    pub band: f64,
    /// `‖x*‖²_T / ‖g‖²_T`; `null` means noiseless.
    pub snr: Option<f64>,
    pub eps: f64,
    /// Frequency-estimate perturbation radius `D/T`.
    pub radius: f64,
    /// Discrete tail energy `‖x̂_{S̄}‖²₂`.
    pub tail: f64,
    pub mode: Mode,
    pub noise: NoiseModel,
    pub trials: usize,
    pub seed: u64,
    /// Required pass rate; the exit code is 2 below it.
    pub threshold: f64,
    #[serde(default)]
    pub constants: Constants,
}

impl ExperimentConfig {
    /// Defaults that reproduce the acceptance settings of each task.
    pub fn for_task(task: Task) -> Self {
        let base = Self {
            task,
            k: 4,
            p: 1024,
            d: 1,
            n: 64,
            horizon: 1.0,
            eta: 1.0,
            band: 20.0,
            snr: Some(10.0),
            eps: 0.2,
            radius: 1.0,
            tail: 1.0,
            mode: Mode::Accurate,
            noise: NoiseModel::Orthogonal,
            trials: 100,
            seed: 0,
            threshold: 0.9,
            constants: Constants::default(),
        };
        match task {
            Task::Setquery => Self {
                k: 8,
                eps: 0.5,
                threshold: 0.85,
                ..base
            },
            Task::Estimate1d => Self {
                threshold: 0.8,
                ..base
            },
            Task::Estimatehd => Self {
                k: 3,
                d: 2,
                band: 6.0,
                radius: 0.4,
                threshold: 0.8,
                ..base
            },
            Task::Distill => Self {
                k: 8,
                eps: 0.3,
                ..base
            },
            Task::QsampleBench => Self {
                k: 8,
                trials: 50,
                threshold: 1.0,
                ..base
            },
            Task::EnergyCheck => Self {
                k: 10,
                threshold: 1.0,
                ..base
            },
            Task::Snap => Self {
                k: 5,
                eps: 0.05,
                trials: 50,
                threshold: 1.0,
                ..base
            },
        }
    }

    /// Task defaults overlaid with the keys present in a JSON file.
    pub fn load(task: Task, path: Option<&Path>) -> Result<Self> {
        let mut value = serde_json::to_value(Self::for_task(task))?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let file: Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            if let Some(t) = file.get("task") {
                if t != &Value::String(task.name().into()) {
                    bail!("config {} is for task {t}, not {}", path.display(), task.name());
                }
            }
            merge(&mut value, file);
        }
        let cfg: Self = serde_json::from_value(value).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if let Some(snr) = self.snr {
            if !(snr > 0.0) {
                bail!("snr must be positive (use null for noiseless)");
            }
        }
        if !(self.horizon > 0.0 && self.eta > 0.0 && self.band >= 0.0) {
            bail!("horizon and eta must be positive, band nonnegative");
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            bail!("eps must lie in (0, 1]");
        }
        if self.k == 0 || self.d == 0 {
            bail!("k and d must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            bail!("threshold must lie in [0, 1]");
        }
        Ok(())
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (key, v) in o {
                match b.get_mut(&key) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(key, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}
