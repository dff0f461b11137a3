//! Exact energies of Fourier-sparse signals.
//!
//! `‖x‖_T² = T^{-d} ∫_{[0,T]^d} |x(t)|² dt` has the closed form
//! `Σ_{i,j} v_i conj(v_j) K(f_i − f_j)` with the per-axis kernel
//! `K(Δ) = (e^{2πiΔT} − 1)/(2πiΔT) = e^{πiΔT} sinc(πΔT)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sample_set::WeightedSampleSet;
use crate::signal::{FourierSparseSignal, SignalFn, C64};

const SERIES_CUTOFF: f64 = 1e-8;

/// Normalized mean of `e^{2πiΔt}` over `[0, T]` (one axis).
pub fn kernel_1d(delta: f64, horizon: f64) -> C64 {
    let x = PI * delta * horizon;
    let sinc = if (delta * horizon).abs() < SERIES_CUTOFF {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    C64::from_polar(sinc, x)
}

/// Product kernel over all axes.
pub fn gram_kernel(delta: &[f64], horizon: f64) -> C64 {
    delta
        .iter()
        .map(|&d| kernel_1d(d, horizon))
        .product()
}

/// `⟨e_f, e_g⟩_T` for unit tones at `f` and `g`.
pub fn tone_inner(f: &[f64], g: &[f64], horizon: f64) -> C64 {
    let delta: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
    gram_kernel(&delta, horizon)
}

/// Gram matrix `G_{ij} = ⟨e_{f_i}, e_{f_j}⟩_T`.
pub fn gram_matrix(freqs: &[Vec<f64>], horizon: f64) -> DMatrix<C64> {
    let k = freqs.len();
    DMatrix::from_fn(k, k, |i, j| tone_inner(&freqs[i], &freqs[j], horizon))
}

/// `⟨x, y⟩_T` for two sparse signals on the same horizon.
pub fn inner_product(x: &FourierSparseSignal, y: &FourierSparseSignal) -> C64 {
    let horizon = x.horizon();
    let mut acc = C64::new(0.0, 0.0);
    for a in x.terms() {
        for b in y.terms() {
            acc += a.coeff * b.coeff.conj() * tone_inner(&a.freq, &b.freq, horizon);
        }
    }
    acc
}

pub fn continuous_norm_sq(signal: &FourierSparseSignal) -> f64 {
    inner_product(signal, signal).re.max(0.0)
}

/// `Σ_t w_t |x(t)|²`.
pub fn weighted_norm_sq<F: SignalFn + ?Sized>(
    signal: &F,
    samples: &WeightedSampleSet<Vec<f64>>,
) -> f64 {
    samples
        .points
        .iter()
        .zip(&samples.weights)
        .map(|(t, w)| w * signal.eval(t).norm_sqr())
        .sum()
}

/// Orthogonal projection of `signal` onto `span{e_f : f ∈ freqs}` under `‖·‖_T`.
///
/// Returns the projection as a sparse signal on `freqs`.
pub fn project_onto(
    signal: &FourierSparseSignal,
    freqs: &[Vec<f64>],
) -> Result<FourierSparseSignal> {
    let horizon = signal.horizon();
    if freqs.is_empty() {
        return FourierSparseSignal::zero(signal.dim(), horizon);
    }
    let gram = gram_matrix(freqs, horizon);
    // rhs_i = ⟨signal, e_i⟩ and G c = rhs with G_{ij} = ⟨e_j, e_i⟩.
    let rhs = DVector::from_fn(freqs.len(), |i, _| {
        signal
            .terms()
            .iter()
            .map(|t| t.coeff * tone_inner(&t.freq, &freqs[i], horizon))
            .sum::<C64>()
    });
    let system = gram.transpose();
    let coeffs = system
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::RankDeficient { ratio: 0.0 })?;
    FourierSparseSignal::from_parts(
        signal.dim(),
        horizon,
        freqs,
        coeffs.as_slice(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid_norm(x: &FourierSparseSignal, points: usize) -> f64 {
        let t_max = x.horizon();
        let h = t_max / (points - 1) as f64;
        let mut acc = 0.0;
        for i in 0..points {
            let t = i as f64 * h;
            let w = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
            acc += w * x.eval(&[t]).norm_sqr();
        }
        acc * h / t_max
    }

    #[test]
    fn single_term_is_modulus_squared() {
        let x = FourierSparseSignal::one_dim(3.0, &[1.234], &[C64::new(3.0, 4.0)]).unwrap();
        assert!((continuous_norm_sq(&x) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_tones_on_the_grid() {
        let t = 2.5;
        let x = FourierSparseSignal::one_dim(t, &[0.0, 1.0 / t], &[C64::new(1.0, 0.0); 2]).unwrap();
        assert!((continuous_norm_sq(&x) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_quadrature() {
        let t = 1.0;
        let x = FourierSparseSignal::one_dim(t, &[0.0, 0.3 / t], &[C64::new(1.0, 0.0); 2]).unwrap();
        let q = trapezoid_norm(&x, 1_000_001);
        assert!((continuous_norm_sq(&x) - q).abs() < 1e-8);
    }

    #[test]
    fn kernel_is_continuous_through_zero() {
        let near = kernel_1d(1e-9, 1.0);
        let at = kernel_1d(0.0, 1.0);
        assert!((near - at).norm() < 1e-8);
        assert_eq!(at, C64::new(1.0, 0.0));
    }

    #[test]
    fn projection_residual_is_orthogonal() {
        let x = FourierSparseSignal::one_dim(
            1.0,
            &[0.1, 0.77, 2.3],
            &[C64::new(1.0, 0.5), C64::new(-0.3, 2.0), C64::new(0.4, 0.0)],
        )
        .unwrap();
        let freqs = vec![vec![0.0], vec![1.0]];
        let p = project_onto(&x, &freqs).unwrap();
        let r = x.sub(&p).unwrap();
        for f in &freqs {
            let e = FourierSparseSignal::one_dim(1.0, f, &[C64::new(1.0, 0.0)]).unwrap();
            assert!(inner_product(&r, &e).norm() < 1e-12);
        }
    }

    #[test]
    fn weighted_norm_of_empty_set_is_zero() {
        let x = FourierSparseSignal::one_dim(1.0, &[0.0], &[C64::new(1.0, 0.0)]).unwrap();
        let s = WeightedSampleSet::<Vec<f64>>::empty();
        assert_eq!(weighted_norm_sq(&x, &s), 0.0);
    }

    #[test]
    fn weighted_norm_unit_mass() {
        let x = FourierSparseSignal::one_dim(1.0, &[0.0], &[C64::new(1.0, 0.0)]).unwrap();
        let s = WeightedSampleSet::from_points(
            vec![vec![0.1], vec![0.5], vec![0.9]],
            vec![0.2, 0.3, 0.5],
        );
        assert!((weighted_norm_sq(&x, &s) - 1.0).abs() < 1e-15);
    }
}
