//! Online quadratic-form sampling.
//!
//! Given vectors `v_1..v_n ∈ C^k` and coefficients `α_i ≥ 0`, draw `i` with
//! probability `α_i v_i*Av_i / Σ_j α_j v_j*Av_j` for a Hermitian PSD query
//! `A` chosen after preprocessing. Both structures are binary range trees
//! whose nodes hold `Σ α_i v_i v_i*` over their interval; a query walks one
//! root-to-leaf path, branching left with probability
//! `⟨left.V, A⟩ / (⟨left.V, A⟩ + ⟨right.V, A⟩)`.
//!
//! [`QuadraticFormTree`] keeps one `k×k` aggregate per vector;
//! [`BlockedQuadraticFormTree`] groups vectors into blocks of `k` and keeps
//! the raw block at each leaf, trading an O(k³) leaf step for O(nk) storage.

mod blocked;
mod dense;

pub use blocked::BlockedQuadraticFormTree;
pub use dense::QuadraticFormTree;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::signal::C64;

/// Relative tolerance of the PSD check on queries.
pub const PSD_TOLERANCE: f64 = 1e-9;
/// Relative floor below which the total mass counts as zero.
pub const ZERO_MASS_TOLERANCE: f64 = 1e-14;

/// Common interface of the dense and blocked trees.
pub trait QuadraticSampler: Send + Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dim(&self) -> usize;

    /// Draw an index from `D_A` without validating `query`.
    ///
    /// Callers must guarantee `query` is Hermitian PSD.
    fn sample_trusted(&self, query: &DMatrix<C64>, rng: &mut RngStream) -> Result<usize>;

    /// Exact probability that a draw returns `index`, as the product of the
    /// branching probabilities along its path.
    fn leaf_probability_trusted(&self, query: &DMatrix<C64>, index: usize) -> Result<f64>;

    /// `Σ_i α_i v_i v_i*`.
    fn total(&self) -> DMatrix<C64>;

    fn sample(&self, query: &DMatrix<C64>, rng: &mut RngStream) -> Result<usize> {
        self.validate(query)?;
        self.sample_trusted(query, rng)
    }

    fn leaf_probability(&self, query: &DMatrix<C64>, index: usize) -> Result<f64> {
        self.validate(query)?;
        if index >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "index {index} out of range for {} vectors",
                self.len()
            )));
        }
        self.leaf_probability_trusted(query, index)
    }

    fn validate(&self, query: &DMatrix<C64>) -> Result<()> {
        check_query(query, self.dim())?;
        let total = self.total();
        let mass = frobenius_inner(total.as_slice(), query.as_slice());
        let trace: f64 = (0..total.nrows()).map(|i| total[(i, i)].re).sum();
        if mass <= ZERO_MASS_TOLERANCE * query.norm() * trace {
            return Err(Error::ZeroMass);
        }
        Ok(())
    }
}

/// Checks shape, Hermitian symmetry and the eigenvalue floor.
pub fn check_query(query: &DMatrix<C64>, dim: usize) -> Result<()> {
    if query.nrows() != dim || query.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: query.nrows(),
        });
    }
    let scale = query.norm();
    let asym = (query - query.adjoint()).norm();
    if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument("query matrix is not Hermitian".into()));
    }
    let eig = SymmetricEigen::new(query.clone());
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOLERANCE * scale {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

/// `Re Σ_ij V_ij conj(A_ij)`, which is `tr(VA)` for Hermitian `V`, `A`.
pub(crate) fn frobenius_inner(v: &[C64], a: &[C64]) -> f64 {
    v.iter().zip(a).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Clamped branch probability; `None` when both sides vanish.
pub(crate) fn left_probability(left: f64, right: f64) -> Option<f64> {
    let (l, r) = (left.max(0.0), right.max(0.0));
    let total = l + r;
    if total > 0.0 && total.is_finite() {
        Some(l / total)
    } else {
        None
    }
}

pub(crate) fn coin(rng: &mut RngStream, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// `v*Av` for a column vector stored as a slice.
pub(crate) fn quadratic_form(v: &[C64], a: &DMatrix<C64>) -> f64 {
    let k = v.len();
    let mut acc = 0.0;
    for j in 0..k {
        let mut col = C64::new(0.0, 0.0);
        for i in 0..k {
            col += v[i].conj() * a[(i, j)];
        }
        acc += (col * v[j]).re;
    }
    acc
}

pub(crate) fn validate_inputs(vectors: &[Vec<C64>], coefficients: &[f64]) -> Result<usize> {
    let first = vectors.first().ok_or(Error::EmptyInput)?;
    let k = first.len();
    if k == 0 {
        return Err(Error::InvalidArgument("vectors must be non-empty".into()));
    }
    if coefficients.len() != vectors.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.len(),
            found: coefficients.len(),
        });
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != k) {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: v.len(),
        });
    }
    if coefficients.iter().any(|&a| !(a >= 0.0) || !a.is_finite()) {
        return Err(Error::InvalidArgument("coefficients must be finite and nonnegative".into()));
    }
    if coefficients.iter().all(|&a| a == 0.0) {
        return Err(Error::InvalidArgument("all coefficients are zero".into()));
    }
    Ok(k)
}

/// Midpoint split used by both trees: `[lo, mid]` and `[mid+1, hi]`.
pub(crate) fn split(lo: usize, hi: usize) -> usize {
    (lo + hi) / 2
}
