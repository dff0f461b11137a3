use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::signal::C64;

/// Smallest singular value allowed, relative to the largest.
pub const LSQ_RANK_TOLERANCE: f64 = 1e-10;

/// `min ‖√w ∘ (A v − b)‖₂` over `v`.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub design: DMatrix<C64>,
    pub weights: Vec<f64>,
    pub observations: Vec<C64>,
}

impl RegressionProblem {
    /// `A_{ij} = exp(2πi⟨f_j, t_i⟩)`.
    pub fn tones(points: &[Vec<f64>], freqs: &[Vec<f64>], weights: Vec<f64>, observations: Vec<C64>) -> Self {
        let design = DMatrix::from_fn(points.len(), freqs.len(), |i, j| {
            let phase: f64 = freqs[j].iter().zip(&points[i]).map(|(f, t)| f * t).sum();
            C64::from_polar(1.0, 2.0 * PI * phase)
        });
        Self {
            design,
            weights,
            observations,
        }
    }

    pub fn solve(&self) -> Result<Vec<C64>> {
        weighted_lsq(&self.design, &self.weights, &self.observations)
    }
}

/// Weighted least squares on `diag(√w)·A`: SVD for the rank check, QR for the solve.
pub fn weighted_lsq(design: &DMatrix<C64>, weights: &[f64], observations: &[C64]) -> Result<Vec<C64>> {
    let (s, k) = design.shape();
    if weights.len() != s || observations.len() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            found: weights.len().min(observations.len()),
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if s < k {
        return Err(Error::UnderDetermined {
            samples: s,
            unknowns: k,
        });
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    let mut m = design.clone();
    let mut rhs = DVector::from_column_slice(observations);
    for (i, w) in weights.iter().enumerate() {
        let r = w.sqrt();
        m.row_mut(i).iter_mut().for_each(|x| *x *= r);
        rhs[i] *= r;
    }
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(min > LSQ_RANK_TOLERANCE * max) {
        return Err(Error::RankDeficient { ratio: min / max });
    }
    // Householder QR is backward stable; the SVD solve loses several digits
    // on tall complex designs.
    let qr = m.qr();
    let qb = qr.q().adjoint() * rhs;
    let v = qr
        .r()
        .solve_upper_triangular(&qb)
        .ok_or(Error::RankDeficient { ratio: min / max })?;
    Ok(v.iter().cloned().collect())
}
