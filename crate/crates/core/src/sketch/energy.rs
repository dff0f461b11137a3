//! Worst-case to average energy ratios, the quantity that sizes uniform sketches.

use crate::error::Result;
use crate::norm::continuous_norm_sq;
use crate::signal::{unflatten, DiscreteSignal, FourierSparseSignal, SignalFn, Tone, C64};

/// `max_t |x(t)|² / ‖x‖²_T` over a regular grid with `per_axis` points per
/// axis (endpoints included). Returns 0 for the zero signal.
pub fn continuous_grid_ratio(signal: &FourierSparseSignal, per_axis: usize) -> f64 {
    let norm = continuous_norm_sq(signal);
    if norm == 0.0 || per_axis == 0 {
        return 0.0;
    }
    let d = signal.dim();
    let step = if per_axis > 1 {
        signal.horizon() / (per_axis - 1) as f64
    } else {
        0.0
    };
    let total = per_axis.pow(d as u32);
    let mut t = vec![0.0; d];
    let mut peak = 0.0f64;
    for i in 0..total {
        for (c, g) in t.iter_mut().zip(unflatten(i, per_axis, d)) {
            *c = g as f64 * step;
        }
        peak = peak.max(signal.eval(&t).norm_sqr());
    }
    peak / norm
}

/// `max_t |x_t|² / mean_t |x_t|²`; at most the spectral sparsity.
pub fn discrete_energy_ratio(signal: &DiscreteSignal) -> f64 {
    let values = signal.values();
    let sum: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    if sum == 0.0 {
        return 0.0;
    }
    let peak = values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    peak * values.len() as f64 / sum
}

/// `2^{-k}(1 + e^{2πi⟨f₀,t⟩})^k` with `f₀ = (1/(100dT), …)`, expanded into its
/// `k+1` binomial tones. Its peak-to-average ratio grows with `k`.
pub fn hd_lower_bound_signal(k: usize, dim: usize, horizon: f64) -> Result<FourierSparseSignal> {
    let f0 = 1.0 / (100.0 * dim as f64 * horizon);
    let mut binom = 1.0f64;
    let scale = 0.5f64.powi(k as i32);
    let mut terms = Vec::with_capacity(k + 1);
    for j in 0..=k {
        terms.push(Tone::new(vec![j as f64 * f0; dim], C64::new(binom * scale, 0.0)));
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    FourierSparseSignal::new(dim, horizon, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_signal_peaks_at_origin() {
        let x = hd_lower_bound_signal(6, 2, 1.0).unwrap();
        assert!((x.eval(&[0.0, 0.0]) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(x.sparsity(), 7);
    }

    #[test]
    fn single_tone_ratio_is_one() {
        let x = FourierSparseSignal::one_dim(2.0, &[1.3], &[C64::new(0.0, 2.0)]).unwrap();
        assert!((continuous_grid_ratio(&x, 101) - 1.0).abs() < 1e-12);
    }
}
