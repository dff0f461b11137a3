//! Synthetic instances with retained ground truth.

use anyhow::{bail, ensure, Result};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use sfts_core::dft::idft;
use sfts_core::lattice::{expand_candidates, LatticeBasis};
use sfts_core::norm::{continuous_norm_sq, project_onto};
use sfts_core::oracle::ContinuousNoise;
use sfts_core::signal::unflatten;
use sfts_core::{DiscreteSignal, FourierSparseSignal, RngStream, Tone, C64};

use crate::config::{ExperimentConfig, NoiseModel, Task};

/// Number of off-lattice tones in generated noise.
const NOISE_TONES: usize = 4;

pub fn complex_gaussian(rng: &mut RngStream) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) / std::f64::consts::SQRT_2
}

#[derive(Debug, Clone)]
pub struct ContinuousInstance {
    pub truth: FourierSparseSignal,
    pub noise: ContinuousNoise,
    /// `‖g‖²_T` (expected value for the white part).
    pub noise_energy: f64,
    /// Perturbed frequency estimates handed to the estimator.
    pub sources: Vec<Vec<f64>>,
    pub basis: LatticeBasis,
}

#[derive(Debug, Clone)]
pub struct DiscreteInstance {
    pub signal: DiscreteSignal,
    /// Full spectrum of `signal`, row-major.
    pub spectrum: Vec<C64>,
    pub support: Vec<Vec<usize>>,
    pub tail_energy: f64,
}

#[derive(Debug, Clone)]
pub enum Instance {
    Continuous(ContinuousInstance),
    Discrete(DiscreteInstance),
}

pub fn generate_instance(cfg: &ExperimentConfig, rng: &mut RngStream) -> Result<Instance> {
    match cfg.task {
        Task::Setquery => Ok(Instance::Discrete(generate_discrete(cfg, rng)?)),
        Task::QsampleBench => bail!("qsample-bench has no signal instance"),
        _ => Ok(Instance::Continuous(generate_continuous(cfg, rng)?)),
    }
}

/// `k` distinct frequencies on `ηZ^d ∩ [−F, F]^d`.
pub fn lattice_frequencies(
    k: usize,
    dim: usize,
    eta: f64,
    band: f64,
    rng: &mut RngStream,
) -> Result<Vec<Vec<f64>>> {
    let half = (band / eta + 1e-9).floor() as u64;
    let side = 2 * half + 1;
    let count = u32::try_from(dim)
        .ok()
        .and_then(|d| side.checked_pow(d))
        .unwrap_or(u64::MAX);
    if (k as u64) > count {
        bail!(
            "infeasible: {k} distinct frequencies requested but the η-lattice in [−{band}, {band}]^{dim} holds {count} (η·k > 2F)"
        );
    }
    let count = usize::try_from(count).unwrap_or(usize::MAX);
    let picked = index::sample(rng, count, k);
    Ok(picked
        .iter()
        .map(|mut i| {
            (0..dim)
                .map(|_| {
                    let j = (i as u64 % side) as f64 - half as f64;
                    i /= side as usize;
                    j * eta
                })
                .collect()
        })
        .collect())
}

pub fn random_signal(freqs: &[Vec<f64>], horizon: f64, rng: &mut RngStream) -> Result<FourierSparseSignal> {
    let dim = freqs.first().map_or(1, Vec::len);
    let terms = freqs
        .iter()
        .map(|f| Tone::new(f.clone(), complex_gaussian(rng)))
        .collect();
    Ok(FourierSparseSignal::new(dim, horizon, terms)?)
}

/// A point uniform in the ball of radius `0.999·radius` around `center`.
fn perturb(center: &[f64], radius: f64, rng: &mut RngStream) -> Vec<f64> {
    if radius == 0.0 {
        return center.to_vec();
    }
    let dir: Vec<f64> = (0..center.len()).map(|_| StandardNormal.sample(rng)).collect();
    let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let r = 0.999 * radius * rng.random::<f64>().powf(1.0 / center.len() as f64);
    center.iter().zip(&dir).map(|(c, u)| c + r * u / norm).collect()
}

/// Distinct tones half a lattice step off the grid on every axis.
fn off_lattice_tones(dim: usize, eta: f64, band: f64, horizon: f64, rng: &mut RngStream) -> Result<FourierSparseSignal> {
    let half = (band / eta + 1e-9).floor() as u64;
    let count = (2 * half + 1).saturating_pow(dim as u32) as usize;
    let centers = lattice_frequencies(NOISE_TONES.min(count), dim, eta, band, rng)?;
    let terms = centers
        .into_iter()
        .map(|f| Tone::new(f.iter().map(|c| c + 0.5 * eta).collect(), complex_gaussian(rng)))
        .collect();
    Ok(FourierSparseSignal::new(dim, horizon, terms)?)
}

fn scale_to(signal: &FourierSparseSignal, energy: f64) -> Result<FourierSparseSignal> {
    let current = continuous_norm_sq(signal);
    ensure!(current > 0.0, "noise tones cancelled to zero energy");
    Ok(signal.scaled(C64::new((energy / current).sqrt(), 0.0)))
}

/// Lattice frequencies within the band (uniform ones for `snap`), complex
/// Gaussian coefficients, sources perturbed inside the radius and noise at
/// the configured SNR.
pub fn generate_continuous(cfg: &ExperimentConfig, rng: &mut RngStream) -> Result<ContinuousInstance> {
    let (dim, horizon) = (cfg.d, cfg.horizon);
    let freqs = if cfg.task == Task::Snap {
        (0..cfg.k)
            .map(|_| (0..dim).map(|_| rng.random_range(-cfg.band..=cfg.band)).collect())
            .collect()
    } else {
        lattice_frequencies(cfg.k, dim, cfg.eta, cfg.band, rng)?
    };
    let truth = random_signal(&freqs, horizon, rng)?;
    let sources: Vec<Vec<f64>> = freqs.iter().map(|f| perturb(f, cfg.radius, rng)).collect();
    let basis = LatticeBasis::grid(dim, cfg.eta)?;
    let Some(snr) = cfg.snr else {
        return Ok(ContinuousInstance {
            truth,
            noise: ContinuousNoise::none(dim),
            noise_energy: 0.0,
            sources,
            basis,
        });
    };
    let energy = continuous_norm_sq(&truth) / snr;
    let tones = off_lattice_tones(dim, cfg.eta, cfg.band, horizon, rng)?;
    let noise = match cfg.noise {
        NoiseModel::Mixed => {
            let tones = scale_to(&tones, energy / 2.0)?;
            let white_seed = rng.random();
            ContinuousNoise::new(dim, Some(tones), (energy / 2.0).sqrt(), white_seed)
        }
        NoiseModel::Orthogonal => {
            let cands = expand_candidates(&basis, &sources, cfg.radius)?;
            let inside = project_onto(&tones, &cands.candidates)?;
            let g = scale_to(&tones.sub(&inside)?, energy)?;
            ContinuousNoise::new(dim, Some(g), 0.0, 0)
        }
    };
    Ok(ContinuousInstance {
        truth,
        noise_energy: noise.energy(),
        noise,
        sources,
        basis,
    })
}

pub fn generate_discrete(cfg: &ExperimentConfig, rng: &mut RngStream) -> Result<DiscreteInstance> {
    let (side, dim) = (cfg.p, cfg.d);
    let n = u32::try_from(dim)
        .ok()
        .and_then(|d| side.checked_pow(d))
        .filter(|&n| n <= 1 << 24);
    let Some(n) = n else {
        bail!("discrete domain {side}^{dim} is too large");
    };
    if cfg.k > n {
        bail!("infeasible: k = {} exceeds the domain size n = {n}", cfg.k);
    }
    ensure!(cfg.tail >= 0.0, "tail energy must be nonnegative");
    let support = index::sample(rng, n, cfg.k).into_vec();
    let mut spectrum: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    for &f in &support {
        spectrum[f] = C64::new(0.0, 0.0);
    }
    let raw: f64 = spectrum.iter().map(|v| v.norm_sqr()).sum();
    let scale = if cfg.tail > 0.0 && raw > 0.0 { (cfg.tail / raw).sqrt() } else { 0.0 };
    spectrum.iter_mut().for_each(|v| *v *= scale);
    for &f in &support {
        spectrum[f] = complex_gaussian(rng) * 10.0;
    }
    let signal = DiscreteSignal::new(side, dim, idft(&spectrum, side, dim))?;
    let tail_energy = spectrum
        .iter()
        .enumerate()
        .filter(|(i, _)| !support.contains(i))
        .map(|(_, v)| v.norm_sqr())
        .sum();
    Ok(DiscreteInstance {
        signal,
        spectrum,
        support: support.iter().map(|&f| unflatten(f, side, dim)).collect(),
        tail_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_frequencies_are_distinct_and_in_band() {
        let mut rng = RngStream::new(3, 0);
        let f = lattice_frequencies(41, 1, 1.0, 20.0, &mut rng).unwrap();
        let mut xs: Vec<f64> = f.iter().map(|v| v[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!(xs.windows(2).all(|w| w[1] - w[0] >= 1.0 - 1e-12));
        assert!(xs.iter().all(|x| x.abs() <= 20.0));
        assert!(lattice_frequencies(42, 1, 1.0, 20.0, &mut rng).is_err());
    }
}
