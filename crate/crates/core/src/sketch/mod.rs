//! Oblivious sketches and sketch distillation.
//!
//! Stage 1 draws a large sample set that preserves `‖·‖_T` (or `‖·‖₂`) for
//! every `k`-sparse signal without knowing the frequencies. Stage 2 knows the
//! frequencies and distills that set with RandBSS+ to `O(k/ε²)` points.

mod density;
mod distill;
mod energy;

pub use density::BiasedTimeDensity;
pub use distill::{distill_1d, distill_discrete, distill_discrete_with, distill_hd, Distillation};
pub use energy::{continuous_grid_ratio, discrete_energy_ratio, hd_lower_bound_signal};

use rand::Rng;

use crate::error::{Error, Result};
use crate::sample_set::{Provenance, WeightedSampleSet};
use crate::signal::unflatten;
use crate::wbsp::WbspConfig;

/// Constants standing in for the hidden ones in the sample-size bounds.
#[derive(Debug, Clone)]
pub struct SketchConfig {
    pub constant: f64,
    /// Failure budget `ρ`.
    pub rho: f64,
    /// Cap on the stage-1 size of [`distill_hd`].
    pub hd_cap: usize,
    pub wbsp: WbspConfig,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self {
            constant: 10.0,
            rho: 0.1,
            hd_cap: 1_000_000,
            wbsp: WbspConfig::default(),
        }
    }
}

impl SketchConfig {
    /// `⌈C ε^{-2} k ln(k+1) ln((k+1)/ρ)⌉`, the weighted 1-D sketch size.
    pub fn weighted_size(&self, k: usize, eps: f64) -> usize {
        let k = k as f64;
        (self.constant / (eps * eps) * k * (k + 1.0).ln() * ((k + 1.0) / self.rho).ln()).ceil() as usize
    }

    /// `⌈C ε^{-2} k ln((k+1)/ρ)⌉`, enough for discrete signals (energy bound `k`).
    pub fn discrete_size(&self, k: usize, eps: f64) -> usize {
        let k = k as f64;
        (self.constant / (eps * eps) * k * ((k + 1.0) / self.rho).ln()).ceil() as usize
    }

    /// `⌈C ε^{-2} k^{2d} ln((k+1)/ρ)⌉`, capped at [`hd_cap`](Self::hd_cap).
    pub fn hd_size(&self, k: usize, dim: usize, eps: f64) -> usize {
        let kf = k as f64;
        let raw = self.constant / (eps * eps) * kf.powi(2 * dim as i32) * ((kf + 1.0) / self.rho).ln();
        if raw >= self.hd_cap as f64 {
            self.hd_cap
        } else {
            raw.ceil() as usize
        }
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

fn check_size(s: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::InvalidArgument("sketch size must be at least 1".into()));
    }
    Ok(())
}

/// `s` i.i.d. uniform points on `[0, T]^d`, each weighted `1/s`.
pub fn uniform_sketch_box(
    dim: usize,
    horizon: f64,
    s: usize,
    rng: &mut impl Rng,
) -> Result<WeightedSampleSet<Vec<f64>>> {
    check_size(s)?;
    if dim == 0 || !(horizon > 0.0) {
        return Err(Error::InvalidArgument("need dim ≥ 1 and a positive horizon".into()));
    }
    let points = (0..s)
        .map(|_| (0..dim).map(|_| horizon * rng.random::<f64>()).collect())
        .collect();
    Ok(WeightedSampleSet::from_points(points, vec![1.0 / s as f64; s]).with_provenance(Provenance::Uniform))
}

/// `s` i.i.d. uniform points of `[p]^d`, each weighted `1/s`. Repeats are kept.
pub fn uniform_sketch_discrete(
    side: usize,
    dim: usize,
    s: usize,
    rng: &mut impl Rng,
) -> Result<WeightedSampleSet<Vec<usize>>> {
    check_size(s)?;
    let n = discrete_len(side, dim)?;
    let points = (0..s)
        .map(|_| unflatten(rng.random_range(0..n), side, dim))
        .collect();
    Ok(WeightedSampleSet::from_points(points, vec![1.0 / s as f64; s]).with_provenance(Provenance::Uniform))
}

pub(crate) fn discrete_len(side: usize, dim: usize) -> Result<usize> {
    if side == 0 || dim == 0 {
        return Err(Error::InvalidArgument("need p ≥ 1 and d ≥ 1".into()));
    }
    u32::try_from(dim)
        .ok()
        .and_then(|d| side.checked_pow(d))
        .ok_or_else(|| Error::InvalidArgument(format!("p^d overflows for p={side}, d={dim}")))
}

/// Stage-1 sketch for `k`-sparse signals on `[0, T]`, drawn from the biased
/// density centred on `T/2`.
#[derive(Debug, Clone)]
pub struct WeightedSketch {
    pub samples: WeightedSampleSet<f64>,
    pub density: BiasedTimeDensity,
    /// `D′(t) = w_t / Σw`, the distribution handed to stage 2.
    pub distribution: Vec<f64>,
}

/// Draws `s` points from the biased density and weights them by
/// `w = 1/(T·s·D(t))`, so that `E‖x‖²_{S,w} = ‖x‖²_T`.
pub fn weighted_sketch_1d(
    k: usize,
    eps: f64,
    horizon: f64,
    config: &SketchConfig,
    rng: &mut impl Rng,
) -> Result<WeightedSketch> {
    check_eps(eps)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let s = config.weighted_size(k, eps);
    let half = horizon / 2.0;
    let density = BiasedTimeDensity::new(half, k as f64)?;
    let mut points = Vec::with_capacity(s);
    let mut weights = Vec::with_capacity(s);
    for _ in 0..s {
        let centred = density.inverse_cdf(rng.random::<f64>());
        points.push(centred + half);
        weights.push(1.0 / (horizon * s as f64 * density.pdf(centred)));
    }
    let total: f64 = weights.iter().sum();
    let distribution = weights.iter().map(|w| w / total).collect();
    Ok(WeightedSketch {
        samples: WeightedSampleSet::from_points(points, weights)
            .with_provenance(Provenance::WeightedSketch),
        density,
        distribution,
    })
}
