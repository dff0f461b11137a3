use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::lsq::RegressionProblem;
use crate::error::{Error, Result};
use crate::oracle::NoisyOracle;
use crate::rng::RngStream;
use crate::signal::FourierSparseSignal;

/// Directions tried before giving up on separating the projected frequencies.
pub const NOISELESS_RETRIES: usize = 5;
const COLLISION_TOLERANCE: f64 = 1e-12;

/// Exact recovery from `k` noiseless samples on an arithmetic progression.
///
/// The progression `t_i = (T/2)·1 + (i − (k−1)/2)·δ` runs along `δ = s·o` for a
/// random direction `o` (`±1` in one dimension). Along it the samples form a
/// Vandermonde system in `z_j = e^{2πi⟨f_j,δ⟩}`, nonsingular when the
/// projections `⟨f_j, o⟩` are distinct. The step keeps `|⟨f_j,δ⟩| < 1/2`, so
/// distinct projections give distinct nodes, and keeps every sample in `[0, T]^d`.
pub fn recover_noiseless(
    oracle: &mut NoisyOracle<'_>,
    freqs: &[Vec<f64>],
    horizon: f64,
    rng: &mut RngStream,
) -> Result<FourierSparseSignal> {
    let k = freqs.len();
    let d = oracle.dim();
    if k == 0 {
        return FourierSparseSignal::zero(d, horizon);
    }
    if let Some(f) = freqs.iter().find(|f| f.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: f.len(),
        });
    }
    for _ in 0..NOISELESS_RETRIES {
        let dir: Vec<f64> = if d == 1 {
            vec![if rng.random::<bool>() { 1.0 } else { -1.0 }]
        } else {
            (0..d).map(|_| rng.sample(StandardNormal)).collect()
        };
        let proj: Vec<f64> = freqs
            .iter()
            .map(|f| f.iter().zip(&dir).map(|(a, b)| a * b).sum())
            .collect();
        let mut sorted = proj.clone();
        sorted.sort_by(f64::total_cmp);
        let scale = sorted.iter().fold(1.0f64, |m, p| m.max(p.abs()));
        if sorted.windows(2).any(|w| w[1] - w[0] <= COLLISION_TOLERANCE * scale) {
            continue;
        }
        let peak = sorted[0].abs().max(sorted[k - 1].abs());
        let dir_inf = dir.iter().fold(0.0f64, |m, o| m.max(o.abs()));
        let mut step = f64::INFINITY;
        if peak > 0.0 {
            step = step.min(0.99 / (2.0 * peak));
        }
        if k > 1 {
            step = step.min(horizon / (2.0 * (k - 1) as f64 * dir_inf));
        }
        if !step.is_finite() {
            step = 0.0;
        }
        let centre = (k as f64 - 1.0) / 2.0;
        let points: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                dir.iter()
                    .map(|o| horizon / 2.0 + (i as f64 - centre) * step * o)
                    .collect()
            })
            .collect();
        let observations = points.iter().map(|t| oracle.query(t)).collect();
        let problem = RegressionProblem::tones(&points, freqs, vec![1.0; k], observations);
        let coeffs = solve_square(&problem)?;
        return FourierSparseSignal::from_parts(d, horizon, freqs, &coeffs);
    }
    Err(Error::SingularSystem {
        retries: NOISELESS_RETRIES,
    })
}

fn solve_square(problem: &RegressionProblem) -> Result<Vec<crate::signal::C64>> {
    let a: &DMatrix<_> = &problem.design;
    let b = DVector::from_column_slice(&problem.observations);
    let x = a
        .clone()
        .lu()
        .solve(&b)
        .ok_or(Error::SingularSystem { retries: 0 })?;
    Ok(x.iter().cloned().collect())
}
