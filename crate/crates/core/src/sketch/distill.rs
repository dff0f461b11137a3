use std::collections::HashMap;

use rand::Rng;

use super::{check_eps, discrete_len, uniform_sketch_box, weighted_sketch_1d, SketchConfig};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sample_set::{Provenance, WeightedSampleSet};
use crate::signal::unflatten;
use crate::wbsp::{rand_bss_plus, DiscreteExponentialFamily, ExponentialFamily, FunctionFamily};

/// A distilled sample set together with the stage-1 support it was cut from.
#[derive(Debug, Clone)]
pub struct Distillation<P> {
    /// Distinct points with summed weights and coefficients.
    pub samples: WeightedSampleSet<P>,
    /// Stage-1 support after merging repeated points.
    pub support: Vec<P>,
    /// `samples.points[i] == support[indices[i]]`.
    pub indices: Vec<usize>,
    pub iterations: usize,
}

fn distinct<T: PartialEq + std::fmt::Debug>(freqs: &[T]) -> Result<()> {
    if freqs.is_empty() {
        return Err(Error::EmptyInput);
    }
    for i in 0..freqs.len() {
        if freqs[..i].contains(&freqs[i]) {
            return Err(Error::InvalidArgument(format!("duplicate frequency {:?}", freqs[i])));
        }
    }
    Ok(())
}

/// Runs the barrier walk over `support` weighted by `probs` and rescales the
/// output by the stage-1 mass `total`, so weights keep the stage-1 normalization.
fn stage_two<P: Clone, F: FunctionFamily<P>>(
    family: &F,
    support: Vec<P>,
    probs: &[f64],
    total: f64,
    wbsp_eps: f64,
    provenance: Provenance,
    config: &SketchConfig,
    rng: &mut RngStream,
) -> Result<Distillation<P>> {
    let (out, _) = rand_bss_plus(family, &support, probs, wbsp_eps, &config.wbsp, rng)?;
    let (mut samples, indices) = out.merged();
    samples.scale_weights(total);
    samples.provenance = provenance;
    Ok(Distillation {
        samples,
        support,
        indices,
        iterations: out.iterations,
    })
}

/// Weighted biased sketch, then RandBSS+ at accuracy `ε²` over the sketch.
///
/// The output has about `14.4·k/ε²` distinct points and preserves `‖x‖²_T`
/// within `1 ± ε` for signals on `freqs`.
pub fn distill_1d(
    freqs: &[f64],
    eps: f64,
    horizon: f64,
    config: &SketchConfig,
    rng: &mut RngStream,
) -> Result<Distillation<f64>> {
    check_eps(eps)?;
    distinct(freqs)?;
    let sketch = weighted_sketch_1d(freqs.len(), eps, horizon, config, rng)?;
    let total = sketch.samples.total_weight();
    let family = ExponentialFamily::one_dim(freqs);
    stage_two(
        &family,
        sketch.samples.points,
        &sketch.distribution,
        total,
        eps * eps,
        Provenance::Distill1d,
        config,
        rng,
    )
}

/// Uniform sketch of `[0, T]^d` sized by the `k^{2d}` energy bound, then
/// RandBSS+ at accuracy `ε²`.
pub fn distill_hd(
    freqs: &[Vec<f64>],
    eps: f64,
    horizon: f64,
    dim: usize,
    config: &SketchConfig,
    rng: &mut RngStream,
) -> Result<Distillation<Vec<f64>>> {
    check_eps(eps)?;
    distinct(freqs)?;
    if let Some(f) = freqs.iter().find(|f| f.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: f.len(),
        });
    }
    let s = config.hd_size(freqs.len(), dim, eps).max(freqs.len());
    let sketch = uniform_sketch_box(dim, horizon, s, rng)?;
    let probs = vec![1.0 / s as f64; s];
    let family = ExponentialFamily::new(freqs.to_vec());
    stage_two(
        &family,
        sketch.points,
        &probs,
        1.0,
        eps * eps,
        Provenance::DistillHd,
        config,
        rng,
    )
}

/// Uniform sketch of `[p]^d`, then RandBSS+ at accuracy `(ε/4)²`.
///
/// Output weights satisfy `n·‖x‖²_{S,w} ≈ ‖x‖²₂` for `x` with spectrum on `freqs`.
pub fn distill_discrete(
    freqs: &[Vec<usize>],
    eps: f64,
    side: usize,
    dim: usize,
    config: &SketchConfig,
    rng: &mut RngStream,
) -> Result<Distillation<Vec<usize>>> {
    distill_discrete_with(freqs, eps, (eps / 4.0).powi(2), side, dim, config, rng)
}

/// [`distill_discrete`] with an explicit barrier-walk accuracy.
pub fn distill_discrete_with(
    freqs: &[Vec<usize>],
    eps: f64,
    wbsp_eps: f64,
    side: usize,
    dim: usize,
    config: &SketchConfig,
    rng: &mut RngStream,
) -> Result<Distillation<Vec<usize>>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1], got {eps}")));
    }
    check_eps(wbsp_eps)?;
    distinct(freqs)?;
    let n = discrete_len(side, dim)?;
    if freqs.len() > n {
        return Err(Error::InvalidArgument(format!(
            "{} frequencies exceed the domain size {n}",
            freqs.len()
        )));
    }
    if let Some(f) = freqs.iter().find(|f| f.len() != dim || f.iter().any(|&c| c >= side)) {
        return Err(Error::InvalidArgument(format!("frequency {f:?} is not in [{side}]^{dim}")));
    }
    let s0 = config.discrete_size(freqs.len(), eps);
    // Merge repeated draws; D′ is proportional to multiplicity.
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut support = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for _ in 0..s0 {
        let idx = rng.random_range(0..n);
        let pos = *slot.entry(idx).or_insert_with(|| {
            support.push(unflatten(idx, side, dim));
            counts.push(0.0);
            support.len() - 1
        });
        counts[pos] += 1.0;
    }
    let probs: Vec<f64> = counts.iter().map(|c| c / s0 as f64).collect();
    let family = DiscreteExponentialFamily::new(freqs.to_vec(), side);
    stage_two(
        &family,
        support,
        &probs,
        1.0,
        wbsp_eps,
        Provenance::DistillDiscrete,
        config,
        rng,
    )
}
