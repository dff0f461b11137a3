use serde::{Deserialize, Serialize};

use crate::norm::continuous_norm_sq;
use crate::signal::{FourierSparseSignal, C64};

/// Outcome of one estimation run.
#[derive(Debug, Clone)]
pub struct EstimationReport {
    pub signal: FourierSparseSignal,
    /// Oracle queries spent (the counter delta).
    pub samples: u64,
    /// Number of candidate frequencies regressed on.
    pub k_tilde: usize,
    pub seed: u64,
    pub wall_ms: f64,
    /// Set when the candidate set was empty and the zero signal was returned.
    pub degenerate: bool,
    /// `‖y − x*‖²_T`, once ground truth is attached.
    pub error_sq: Option<f64>,
    /// `‖y − x*‖²_T / ‖g‖²_T`; `None` without ground truth or for zero noise.
    pub ratio: Option<f64>,
}

/// The JSON record emitted per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub ratio: Option<f64>,
    pub samples: u64,
    pub seed: u64,
    pub k_tilde: usize,
    pub wall_ms: f64,
}

/// Coefficients above `tol·‖v‖₂`.
pub fn pruned_sparsity(coeffs: &[C64], tol: f64) -> usize {
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    coeffs.iter().filter(|c| c.norm() > tol * norm).count()
}

impl EstimationReport {
    /// Sparsity of the output ignoring coefficients below `1e−10·‖v‖₂`.
    pub fn pruned_sparsity(&self) -> usize {
        pruned_sparsity(&self.signal.coeffs(), 1e-10)
    }

    pub fn raw_sparsity(&self) -> usize {
        self.signal.sparsity()
    }

    pub fn with_ground_truth(mut self, truth: &FourierSparseSignal, noise_energy: f64) -> Self {
        let err = self
            .signal
            .sub(truth)
            .map(|d| continuous_norm_sq(&d))
            .unwrap_or(f64::NAN);
        self.error_sq = Some(err);
        self.ratio = (noise_energy > 0.0).then(|| err / noise_energy);
        self
    }

    pub fn record(&self) -> ReportRecord {
        ReportRecord {
            ratio: self.ratio,
            samples: self.samples,
            seed: self.seed,
            k_tilde: self.k_tilde,
            wall_ms: self.wall_ms,
        }
    }
}

/// Outcome of a discrete set query.
#[derive(Debug, Clone)]
pub struct SetQueryReport {
    pub freqs: Vec<Vec<usize>>,
    /// `x̂′_f` for each queried frequency.
    pub estimate: Vec<C64>,
    pub samples: u64,
    pub seed: u64,
    pub wall_ms: f64,
    /// `‖(x̂′ − x̂)_S‖²₂ / ‖x̂_{S̄}‖²₂`, once ground truth is attached.
    pub ratio: Option<f64>,
    pub error_sq: Option<f64>,
}

impl SetQueryReport {
    /// `spectrum` is the full DFT of the signal, row-major.
    pub fn with_ground_truth(mut self, spectrum: &[C64], side: usize) -> Self {
        let mut on_set = vec![false; spectrum.len()];
        let mut err = 0.0;
        for (f, est) in self.freqs.iter().zip(&self.estimate) {
            let i = crate::signal::flat_index(f, side);
            on_set[i] = true;
            err += (est - spectrum[i]).norm_sqr();
        }
        let tail: f64 = spectrum
            .iter()
            .zip(&on_set)
            .filter(|(_, &s)| !s)
            .map(|(v, _)| v.norm_sqr())
            .sum();
        self.error_sq = Some(err);
        self.ratio = (tail > 0.0).then(|| err / tail);
        self
    }

    pub fn record(&self) -> ReportRecord {
        ReportRecord {
            ratio: self.ratio,
            samples: self.samples,
            seed: self.seed,
            k_tilde: self.freqs.len(),
            wall_ms: self.wall_ms,
        }
    }
}
