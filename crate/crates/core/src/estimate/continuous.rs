use std::time::Instant;

use super::lsq::RegressionProblem;
use super::report::EstimationReport;
use crate::error::{Error, Result};
use crate::lattice::{expand_candidates, CandidateSet, LatticeBasis};
use crate::oracle::NoisyOracle;
use crate::rng::RngStream;
use crate::sketch::{distill_1d, distill_hd, uniform_sketch_box, weighted_sketch_1d, SketchConfig};
use crate::signal::FourierSparseSignal;

/// Knobs for the continuous estimators.
#[derive(Debug, Clone)]
pub struct EstimateConfig {
    pub sketch: SketchConfig,
    /// Accuracy handed to the distiller by the sample-optimal estimators.
    pub distill_eps: f64,
    /// Larger candidate sets fail with `CandidateExplosion`.
    pub candidate_cap: usize,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            sketch: SketchConfig::default(),
            distill_eps: 0.1,
            candidate_cap: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateMode {
    /// Distill to `O(k̃)` samples; error `O(‖g‖²_T)`.
    Optimal,
    /// Regress on the whole stage-1 sketch; error `(1 + ε)‖g‖²_T`.
    Accurate { eps: f64 },
}

fn candidates(
    basis: &LatticeBasis,
    sources: &[Vec<f64>],
    radius: f64,
    config: &EstimateConfig,
) -> Result<CandidateSet> {
    let set = expand_candidates(basis, sources, radius)?;
    if set.len() > config.candidate_cap {
        return Err(Error::CandidateExplosion {
            count: set.len(),
            cap: config.candidate_cap,
        });
    }
    Ok(set)
}

/// Queries the oracle once per point and fits coefficients on `freqs`.
fn regress(
    oracle: &mut NoisyOracle<'_>,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    freqs: &[Vec<f64>],
    horizon: f64,
) -> Result<FourierSparseSignal> {
    let observations = points.iter().map(|t| oracle.query(t)).collect();
    let problem = RegressionProblem::tones(&points, freqs, weights, observations);
    let coeffs = problem.solve()?;
    FourierSparseSignal::from_parts(oracle.dim(), horizon, freqs, &coeffs)
}

fn finish(
    signal: FourierSparseSignal,
    k_tilde: usize,
    degenerate: bool,
    before: u64,
    oracle: &NoisyOracle<'_>,
    rng: &RngStream,
    start: Instant,
) -> EstimationReport {
    EstimationReport {
        signal,
        samples: oracle.queries() - before,
        k_tilde,
        seed: rng.seed(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        degenerate,
        error_sq: None,
        ratio: None,
    }
}

/// Recovers the coefficients of a signal whose frequencies lie on `ηZ` within
/// `radius` of the estimates in `sources`.
pub fn estimate_1d(
    oracle: &mut NoisyOracle<'_>,
    sources: &[f64],
    eta: f64,
    radius: f64,
    horizon: f64,
    mode: EstimateMode,
    config: &EstimateConfig,
    rng: &mut RngStream,
) -> Result<EstimationReport> {
    let start = Instant::now();
    let before = oracle.queries();
    if oracle.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: oracle.dim(),
        });
    }
    let basis = LatticeBasis::grid(1, eta)?;
    let lifted: Vec<Vec<f64>> = sources.iter().map(|&f| vec![f]).collect();
    let set = candidates(&basis, &lifted, radius, config)?;
    if set.is_empty() {
        let zero = FourierSparseSignal::zero(1, horizon)?;
        return Ok(finish(zero, 0, true, before, oracle, rng, start));
    }
    let freqs: Vec<f64> = set.candidates.iter().map(|f| f[0]).collect();
    let (points, weights) = match mode {
        EstimateMode::Optimal => {
            let d = distill_1d(&freqs, config.distill_eps, horizon, &config.sketch, rng)?;
            (d.samples.points, d.samples.weights)
        }
        EstimateMode::Accurate { eps } => {
            let sk = weighted_sketch_1d(freqs.len(), eps.sqrt(), horizon, &config.sketch, rng)?;
            (sk.samples.points, sk.samples.weights)
        }
    };
    let points = points.into_iter().map(|t| vec![t]).collect();
    let y = regress(oracle, points, weights, &set.candidates, horizon)?;
    Ok(finish(y, set.len(), false, before, oracle, rng, start))
}

/// Sample-optimal 1-D estimation: candidates, distillation, regression.
pub fn estimate_1d_optimal(
    oracle: &mut NoisyOracle<'_>,
    sources: &[f64],
    eta: f64,
    radius: f64,
    horizon: f64,
    config: &EstimateConfig,
    rng: &mut RngStream,
) -> Result<EstimationReport> {
    estimate_1d(oracle, sources, eta, radius, horizon, EstimateMode::Optimal, config, rng)
}

/// High-accuracy 1-D estimation: regression on the full weighted sketch.
pub fn estimate_1d_accurate(
    oracle: &mut NoisyOracle<'_>,
    sources: &[f64],
    eta: f64,
    radius: f64,
    horizon: f64,
    eps: f64,
    config: &EstimateConfig,
    rng: &mut RngStream,
) -> Result<EstimationReport> {
    estimate_1d(
        oracle,
        sources,
        eta,
        radius,
        horizon,
        EstimateMode::Accurate { eps },
        config,
        rng,
    )
}

/// `d`-dimensional estimation over the lattice `Λ(B)`.
pub fn estimate_hd(
    oracle: &mut NoisyOracle<'_>,
    sources: &[Vec<f64>],
    basis: &LatticeBasis,
    radius: f64,
    horizon: f64,
    mode: EstimateMode,
    config: &EstimateConfig,
    rng: &mut RngStream,
) -> Result<EstimationReport> {
    let start = Instant::now();
    let before = oracle.queries();
    let dim = basis.dim();
    if oracle.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: oracle.dim(),
        });
    }
    let set = candidates(basis, sources, radius, config)?;
    if set.is_empty() {
        let zero = FourierSparseSignal::zero(dim, horizon)?;
        return Ok(finish(zero, 0, true, before, oracle, rng, start));
    }
    let (points, weights) = match mode {
        EstimateMode::Optimal => {
            let d = distill_hd(&set.candidates, config.distill_eps, horizon, dim, &config.sketch, rng)?;
            (d.samples.points, d.samples.weights)
        }
        EstimateMode::Accurate { eps } => {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
            }
            let s = config.sketch.hd_size(set.len(), dim, eps.sqrt()).max(set.len());
            let sk = uniform_sketch_box(dim, horizon, s, rng)?;
            (sk.points, sk.weights)
        }
    };
    let y = regress(oracle, points, weights, &set.candidates, horizon)?;
    Ok(finish(y, set.len(), false, before, oracle, rng, start))
}
