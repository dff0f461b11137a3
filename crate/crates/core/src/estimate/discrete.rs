use std::time::Instant;

use super::lsq::weighted_lsq;
use super::report::SetQueryReport;
use crate::error::Result;
use crate::oracle::DiscreteOracle;
use crate::rng::RngStream;
use crate::sketch::{distill_discrete, SketchConfig};
use crate::wbsp::{DiscreteExponentialFamily, FunctionFamily};

/// Estimates `x̂_f` for every `f` in `freqs` from `O(k/ε)` time-domain samples,
/// with `‖(x̂′ − x̂)_S‖²₂ ≤ ε‖x̂_{S̄}‖²₂` with probability ≥ 0.9.
///
/// With `x_t = (1/n) Σ_f x̂_f e^{2πi⟨f,t⟩/p}`, the regression returns `x̂/n`,
/// which is rescaled by `n` on output.
pub fn set_query_discrete(
    oracle: &mut DiscreteOracle<'_>,
    freqs: &[Vec<usize>],
    eps: f64,
    config: &SketchConfig,
    rng: &mut RngStream,
) -> Result<SetQueryReport> {
    let start = Instant::now();
    let before = oracle.queries();
    let (side, dim) = (oracle.side(), oracle.dim());
    let distilled = distill_discrete(freqs, eps.sqrt(), side, dim, config, rng)?;
    let points = distilled.samples.points;
    let observations: Vec<_> = points.iter().map(|t| oracle.query(t)).collect();
    let family = DiscreteExponentialFamily::new(freqs.to_vec(), side);
    let design = family.feature_matrix(&points);
    let coeffs = weighted_lsq(&design, &distilled.samples.weights, &observations)?;
    let n = (side as f64).powi(dim as i32);
    Ok(SetQueryReport {
        freqs: freqs.to_vec(),
        estimate: coeffs.into_iter().map(|c| c * n).collect(),
        samples: oracle.queries() - before,
        seed: rng.seed(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        ratio: None,
        error_sq: None,
    })
}
