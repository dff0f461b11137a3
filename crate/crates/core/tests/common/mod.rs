#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use sfts_core::{FourierSparseSignal, RngStream, WeightedSampleSet, C64};

pub fn complex_gaussian(rng: &mut RngStream) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) / 2f64.sqrt()
}

pub fn random_vectors(n: usize, k: usize, rng: &mut RngStream) -> Vec<Vec<C64>> {
    (0..n)
        .map(|_| (0..k).map(|_| complex_gaussian(rng)).collect())
        .collect()
}

/// `G G*` for a random `k×r` complex Gaussian `G`; rank-deficient when `r < k`.
pub fn random_psd(k: usize, rank: usize, rng: &mut RngStream) -> DMatrix<C64> {
    let g = DMatrix::from_fn(k, rank, |_, _| complex_gaussian(rng));
    let a = &g * g.adjoint();
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Brute-force `D_A(i) = α_i v_i*Av_i / Σ_j α_j v_j*Av_j`.
pub fn brute_force_distribution(vectors: &[Vec<C64>], alpha: &[f64], a: &DMatrix<C64>) -> Vec<f64> {
    let masses: Vec<f64> = vectors
        .iter()
        .zip(alpha)
        .map(|(v, &w)| {
            let col = nalgebra::DVector::from_column_slice(v);
            w * (col.adjoint() * a * &col)[(0, 0)].re
        })
        .collect();
    let total: f64 = masses.iter().sum();
    masses.iter().map(|m| m / total).collect()
}

pub fn uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Pearson statistic of observed counts against expected probabilities,
/// merging cells with expected count below 5 into one bin.
pub fn chi_squared(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let total: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells: usize = 0;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let e = p * total as f64;
        if e < 5.0 {
            pooled_obs += c as f64;
            pooled_exp += e;
            continue;
        }
        stat += (c as f64 - e).powi(2) / e;
        cells += 1;
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp.max(1e-300);
        cells += 1;
    }
    (stat, cells.saturating_sub(1))
}

/// `k` distinct multiples of `1/T` drawn from `[−span, span]/T`.
pub fn lattice_freqs(k: usize, span: i64, horizon: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut picked: Vec<i64> = Vec::with_capacity(k);
    while picked.len() < k {
        let j = rng.random_range(-span..=span);
        if !picked.contains(&j) {
            picked.push(j);
        }
    }
    picked.iter().map(|&j| j as f64 / horizon).collect()
}

pub fn random_signal_1d(freqs: &[f64], horizon: f64, rng: &mut RngStream) -> FourierSparseSignal {
    let coeffs: Vec<C64> = freqs.iter().map(|_| complex_gaussian(rng)).collect();
    FourierSparseSignal::one_dim(horizon, freqs, &coeffs).unwrap()
}

/// `Σ w |x(t)|²`, summed directly.
pub fn weighted_energy<P>(samples: &WeightedSampleSet<P>, mut eval: impl FnMut(&P) -> C64) -> f64 {
    samples
        .points
        .iter()
        .zip(&samples.weights)
        .map(|(p, w)| w * eval(p).norm_sqr())
        .sum()
}
