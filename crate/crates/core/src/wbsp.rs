//! Well-balanced sampling via a randomized barrier walk (RandBSS+).
//!
//! Given a `dF`-dimensional function family and a finite reference
//! distribution `D`, the walk draws `O(dF/ε)` weighted points whose weighted
//! Gram matrix in a `D`-orthonormal basis has spectrum in
//! `[1 − 10√ε, 1 + 10√ε]`. Each step samples from
//! `D_j(x) ∝ D(x)·v(x)*E_j v(x)` with `E_j = (u_j I − B_j)^{-1} + (B_j − l_j I)^{-1}`
//! through a quadratic-form tree, so a step costs `O(dF² log|D| + dF³)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qsample::{quadratic_form, BlockedQuadraticFormTree, QuadraticFormTree, QuadraticSampler};
use crate::rng::RngStream;
use crate::sample_set::{Provenance, WeightedSampleSet};
use crate::signal::C64;

/// Relative pivot floor for [`orthonormalize`].
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Relative slack allowed before the spectrum counts as outside the barriers.
pub const BARRIER_TOLERANCE: f64 = 1e-9;

/// A linear family `{ Σ_j c_j u_j(t) }` described by its feature map.
pub trait FunctionFamily<P>: Sync {
    fn dim(&self) -> usize;

    /// Writes `(u_1(point), …, u_dF(point))` into `out`.
    fn features(&self, point: &P, out: &mut [C64]);

    /// Row `i` holds the features of `points[i]`.
    fn feature_matrix(&self, points: &[P]) -> DMatrix<C64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(points.len(), d);
        let mut row = vec![C64::new(0.0, 0.0); d];
        for (i, p) in points.iter().enumerate() {
            self.features(p, &mut row);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }
}

/// Tones `exp(2πi⟨f_j, t⟩)` on `R^d`.
#[derive(Debug, Clone)]
pub struct ExponentialFamily {
    freqs: Vec<Vec<f64>>,
}

impl ExponentialFamily {
    pub fn new(freqs: Vec<Vec<f64>>) -> Self {
        Self { freqs }
    }

    pub fn one_dim(freqs: &[f64]) -> Self {
        Self::new(freqs.iter().map(|&f| vec![f]).collect())
    }

    pub fn freqs(&self) -> &[Vec<f64>] {
        &self.freqs
    }
}

impl FunctionFamily<Vec<f64>> for ExponentialFamily {
    fn dim(&self) -> usize {
        self.freqs.len()
    }

    fn features(&self, point: &Vec<f64>, out: &mut [C64]) {
        for (o, f) in out.iter_mut().zip(&self.freqs) {
            let phase: f64 = f.iter().zip(point).map(|(a, b)| a * b).sum();
            *o = C64::from_polar(1.0, 2.0 * PI * phase);
        }
    }
}

/// Scalar points, for one-dimensional families.
impl FunctionFamily<f64> for ExponentialFamily {
    fn dim(&self) -> usize {
        self.freqs.len()
    }

    fn features(&self, point: &f64, out: &mut [C64]) {
        for (o, f) in out.iter_mut().zip(&self.freqs) {
            *o = C64::from_polar(1.0, 2.0 * PI * f[0] * point);
        }
    }
}

/// Discrete tones `exp(2πi⟨f_j, t⟩/p)` on `[p]^d`.
///
/// The phases come from the integer product `U = Fᵀ T` reduced mod `p`, so
/// features are exact regardless of the size of `⟨f, t⟩`.
#[derive(Debug, Clone)]
pub struct DiscreteExponentialFamily {
    freqs: Vec<Vec<usize>>,
    side: usize,
    twiddle: Vec<C64>,
}

impl DiscreteExponentialFamily {
    pub fn new(freqs: Vec<Vec<usize>>, side: usize) -> Self {
        let twiddle = (0..side)
            .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / side as f64))
            .collect();
        Self {
            freqs,
            side,
            twiddle,
        }
    }

    pub fn freqs(&self) -> &[Vec<usize>] {
        &self.freqs
    }

    fn phase_index(&self, f: &[usize], t: &[usize]) -> usize {
        f.iter()
            .zip(t)
            .fold(0, |acc, (a, b)| (acc + (a % self.side) * (b % self.side)) % self.side)
    }
}

impl FunctionFamily<Vec<usize>> for DiscreteExponentialFamily {
    fn dim(&self) -> usize {
        self.freqs.len()
    }

    fn features(&self, point: &Vec<usize>, out: &mut [C64]) {
        for (o, f) in out.iter_mut().zip(&self.freqs) {
            *o = self.twiddle[self.phase_index(f, point)];
        }
    }

    /// Batched form: one integer product `Fᵀ T`, then a table lookup.
    fn feature_matrix(&self, points: &[Vec<usize>]) -> DMatrix<C64> {
        DMatrix::from_fn(points.len(), self.freqs.len(), |i, j| {
            self.twiddle[self.phase_index(&self.freqs[j], &points[i])]
        })
    }
}

/// A family given by a closure; handy for tests and ad-hoc bases.
pub struct FnFamily<F> {
    dim: usize,
    map: F,
}

impl<F> FnFamily<F> {
    pub fn new(dim: usize, map: F) -> Self {
        Self { dim, map }
    }
}

impl<P, F> FunctionFamily<P> for FnFamily<F>
where
    F: Fn(&P, &mut [C64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn features(&self, point: &P, out: &mut [C64]) {
        (self.map)(point, out)
    }
}

/// A `D`-orthonormal basis `v = u·R^{-1}` of a family over a finite support.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    /// `R^{-1}`, mapping raw features to basis coordinates.
    change: DMatrix<C64>,
    /// `values[(i, j)] = v_j(x_i)` on the support.
    values: DMatrix<C64>,
    probs: Vec<f64>,
}

impl OrthonormalBasis {
    pub fn dim(&self) -> usize {
        self.change.ncols()
    }

    pub fn support_len(&self) -> usize {
        self.values.nrows()
    }

    pub fn change_of_basis(&self) -> &DMatrix<C64> {
        &self.change
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `(v_1(x_i), …, v_dF(x_i))` for support point `i`.
    pub fn row(&self, i: usize) -> Vec<C64> {
        self.values.row(i).iter().cloned().collect()
    }

    /// Basis values at arbitrary points of the family's domain.
    pub fn evaluate<P, F: FunctionFamily<P> + ?Sized>(&self, family: &F, points: &[P]) -> DMatrix<C64> {
        family.feature_matrix(points) * &self.change
    }

    /// `Σ_t D(t) v_i(t) conj(v_j(t))`; the identity up to round-off.
    pub fn gram(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut g = DMatrix::zeros(d, d);
        for (i, p) in self.probs.iter().enumerate() {
            for a in 0..d {
                for b in 0..d {
                    g[(a, b)] += self.values[(i, a)] * self.values[(i, b)].conj() * *p;
                }
            }
        }
        g
    }
}

/// Gram–Schmidt (two passes) of the columns of `diag(√D)·X`.
pub fn orthonormalize<P, F: FunctionFamily<P> + ?Sized>(
    family: &F,
    support: &[P],
    probs: &[f64],
) -> Result<OrthonormalBasis> {
    let d = family.dim();
    if d == 0 {
        return Err(Error::InvalidArgument("family dimension must be positive".into()));
    }
    if support.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: support.len(),
            found: probs.len(),
        });
    }
    if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidArgument("support probabilities must be positive".into()));
    }
    if support.len() < d {
        return Err(Error::UnderDetermined {
            samples: support.len(),
            unknowns: d,
        });
    }
    let raw = family.feature_matrix(support);
    orthonormalize_matrix(raw, probs)
}

/// As [`orthonormalize`], starting from precomputed features (row per point).
pub fn orthonormalize_matrix(raw: DMatrix<C64>, probs: &[f64]) -> Result<OrthonormalBasis> {
    let (n, d) = raw.shape();
    let mut q = raw.clone();
    for (i, p) in probs.iter().enumerate() {
        let s = p.sqrt();
        q.row_mut(i).iter_mut().for_each(|x| *x *= s);
    }
    let mut r = DMatrix::<C64>::zeros(d, d);
    let mut pivots = vec![0.0; d];
    for j in 0..d {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = q.column(i).dotc(&q.column(j));
                r[(i, j)] += proj;
                let qi = q.column(i).clone_owned();
                q.column_mut(j).axpy(-proj, &qi, C64::new(1.0, 0.0));
            }
        }
        let norm = q.column(j).norm();
        pivots[j] = norm;
        if norm == 0.0 {
            return Err(Error::RankDeficient { ratio: 0.0 });
        }
        r[(j, j)] = C64::new(norm, 0.0);
        q.column_mut(j).iter_mut().for_each(|x| *x /= norm);
    }
    let largest = pivots.iter().cloned().fold(0.0, f64::max);
    let smallest = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    if smallest < RANK_TOLERANCE * largest {
        return Err(Error::RankDeficient {
            ratio: smallest / largest,
        });
    }
    let change = r
        .solve_upper_triangular(&DMatrix::identity(d, d))
        .ok_or(Error::RankDeficient { ratio: 0.0 })?;
    let values = raw * &change;
    debug_assert_eq!(values.nrows(), n);
    Ok(OrthonormalBasis {
        change,
        values,
        probs: probs.to_vec(),
    })
}

/// Which quadratic-form tree backs the sampling step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreeKind {
    /// Dense below [`WbspConfig::dense_entry_limit`] stored entries, blocked above.
    #[default]
    Auto,
    Dense,
    Blocked,
}

#[derive(Debug, Clone)]
pub struct WbspConfig {
    /// The walk aborts after `cap_factor · dF / ε` iterations.
    pub cap_factor: f64,
    pub tree: TreeKind,
    pub dense_entry_limit: usize,
    /// Keep a per-iteration [`BarrierSnapshot`] log.
    pub record_trace: bool,
}

impl Default for WbspConfig {
    fn default() -> Self {
        Self {
            cap_factor: 64.0,
            tree: TreeKind::Auto,
            dense_entry_limit: 1 << 22,
            record_trace: false,
        }
    }
}

/// Running state of the barrier walk.
#[derive(Debug, Clone)]
pub struct BarrierState {
    pub matrix: DMatrix<C64>,
    pub upper: f64,
    pub lower: f64,
    pub gamma: f64,
    pub mid: f64,
}

impl BarrierState {
    pub fn new(dim: usize, eps: f64) -> Self {
        let d = dim as f64;
        let gamma = eps.sqrt() / 3.0;
        let mid = (4.0 * d / gamma) / (1.0 / (1.0 - gamma) - 1.0 / (1.0 + gamma));
        Self {
            matrix: DMatrix::zeros(dim, dim),
            upper: 2.0 * d / gamma,
            lower: -2.0 * d / gamma,
            gamma,
            mid,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The walk stops once the barriers are `8·dF/γ` apart.
    pub fn finished(&self) -> bool {
        self.upper - self.lower >= 8.0 * self.dim() as f64 / self.gamma
    }

    /// Eigen-decomposes `B` once and returns `(E, Φ, λ_min, λ_max)`.
    fn potential(&self) -> Result<(DMatrix<C64>, f64, f64, f64)> {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let lambda_max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = BARRIER_TOLERANCE * (self.upper - self.lower);
        if lambda_min - self.lower < -tol || self.upper - lambda_max < -tol {
            return Err(Error::BarrierViolation {
                lambda_min,
                lambda_max,
                lower: self.lower,
                upper: self.upper,
            });
        }
        let mut phi = 0.0;
        let scales: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&l| {
                let s = 1.0 / (self.upper - l).max(tol) + 1.0 / (l - self.lower).max(tol);
                phi += s;
                s
            })
            .collect();
        let v = &eig.eigenvectors;
        let mut scaled = v.clone();
        for (j, s) in scales.iter().enumerate() {
            scaled.column_mut(j).iter_mut().for_each(|x| *x *= *s);
        }
        let e = &scaled * v.adjoint();
        let e = (&e + e.adjoint()) * C64::new(0.5, 0.0);
        Ok((e, phi, lambda_min, lambda_max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSnapshot {
    pub lower: f64,
    pub upper: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub potential: f64,
}

/// Result of one barrier walk.
#[derive(Debug, Clone)]
pub struct WbspOutput<P> {
    /// One entry per iteration; points may repeat.
    pub samples: WeightedSampleSet<P>,
    /// Support index drawn at each iteration.
    pub indices: Vec<usize>,
    pub iterations: usize,
    pub final_state: BarrierState,
    pub trace: Vec<BarrierSnapshot>,
}

impl<P: Clone> WbspOutput<P> {
    /// Merge repeated support points, summing weights and coefficients.
    /// Points keep the order of their first draw.
    pub fn merged(&self) -> (WeightedSampleSet<P>, Vec<usize>) {
        let mut slot = std::collections::HashMap::new();
        let mut indices = Vec::new();
        let mut out = WeightedSampleSet {
            points: Vec::new(),
            weights: Vec::new(),
            alphas: Vec::new(),
            provenance: self.samples.provenance,
        };
        for (j, &idx) in self.indices.iter().enumerate() {
            let pos = *slot.entry(idx).or_insert_with(|| {
                indices.push(idx);
                out.points.push(self.samples.points[j].clone());
                out.weights.push(0.0);
                out.alphas.push(0.0);
                out.points.len() - 1
            });
            out.weights[pos] += self.samples.weights[j];
            out.alphas[pos] += self.samples.alphas[j];
        }
        (out, indices)
    }
}

/// RandBSS+ over `support` with reference probabilities `probs`.
pub fn rand_bss_plus<P: Clone, F: FunctionFamily<P> + ?Sized>(
    family: &F,
    support: &[P],
    probs: &[f64],
    eps: f64,
    config: &WbspConfig,
    rng: &mut RngStream,
) -> Result<(WbspOutput<P>, OrthonormalBasis)> {
    check_eps(eps)?;
    let basis = orthonormalize(family, support, probs)?;
    let out = rand_bss_plus_on_basis(&basis, support, eps, config, rng)?;
    Ok((out, basis))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// The walk itself, for a basis already orthonormal under its support distribution.
pub fn rand_bss_plus_on_basis<P: Clone>(
    basis: &OrthonormalBasis,
    support: &[P],
    eps: f64,
    config: &WbspConfig,
    rng: &mut RngStream,
) -> Result<WbspOutput<P>> {
    check_eps(eps)?;
    let d = basis.dim();
    let n = basis.support_len();
    if support.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: support.len(),
        });
    }
    let rows: Vec<Vec<C64>> = (0..n).map(|i| basis.row(i)).collect();
    let use_dense = match config.tree {
        TreeKind::Dense => true,
        TreeKind::Blocked => false,
        TreeKind::Auto => 2 * n * d * d <= config.dense_entry_limit,
    };
    let tree: Box<dyn QuadraticSampler> = if use_dense {
        Box::new(QuadraticFormTree::build(&rows, basis.probs())?)
    } else {
        Box::new(BlockedQuadraticFormTree::build(&rows, basis.probs())?)
    };

    let cap = (config.cap_factor * d as f64 / eps).ceil() as usize;
    let mut state = BarrierState::new(d, eps);
    let gamma = state.gamma;
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    let mut alphas = Vec::new();
    let mut trace = Vec::new();

    while !state.finished() {
        if indices.len() >= cap {
            return Err(Error::IterationCapExceeded { cap });
        }
        let (e, phi, lambda_min, lambda_max) = state.potential()?;
        debug_assert!(state.lower <= lambda_min + BARRIER_TOLERANCE * (state.upper - state.lower));
        debug_assert!(lambda_max <= state.upper + BARRIER_TOLERANCE * (state.upper - state.lower));
        if config.record_trace {
            trace.push(BarrierSnapshot {
                lower: state.lower,
                upper: state.upper,
                lambda_min,
                lambda_max,
                potential: phi,
            });
        }
        let query = &e / C64::new(phi, 0.0);
        let q = tree.sample_trusted(&query, rng)?;
        let v = &rows[q];
        let energy = quadratic_form(v, &e);
        if !(energy > 0.0) {
            return Err(Error::ZeroMass);
        }
        let scale = gamma / energy;
        for j in 0..d {
            for i in 0..d {
                state.matrix[(i, j)] += v[i] * v[j].conj() * scale;
            }
        }
        state.upper += gamma / (phi * (1.0 - gamma));
        state.lower += gamma / (phi * (1.0 + gamma));
        indices.push(q);
        weights.push(scale / state.mid);
        alphas.push(gamma / (phi * state.mid));
    }

    let samples = WeightedSampleSet {
        points: indices.iter().map(|&i| support[i].clone()).collect(),
        weights,
        alphas,
        provenance: Provenance::RandBss,
    };
    Ok(WbspOutput {
        samples,
        iterations: indices.len(),
        indices,
        final_state: state,
        trace,
    })
}

/// Spectral check of a weighted sample set against a reference basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WbspReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Extremes of `‖h‖²_{S,w} / ‖h‖²_D` over the random trial functions.
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// Eigenvalues of `A*A` with `A_{ij} = √w_i v_j(t_i)`, plus `trials` random
/// `h ∈ F` whose norm ratios must fall inside the eigenvalue bracket.
pub fn verify_wbsp<P, F: FunctionFamily<P> + ?Sized>(
    samples: &WeightedSampleSet<P>,
    family: &F,
    basis: &OrthonormalBasis,
    trials: usize,
    rng: &mut RngStream,
) -> WbspReport {
    let d = basis.dim();
    let mut a = basis.evaluate(family, &samples.points);
    for (i, w) in samples.weights.iter().enumerate() {
        let s = w.sqrt();
        a.row_mut(i).iter_mut().for_each(|x| *x *= s);
    }
    let m = a.adjoint() * &a;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(m.clone());
    let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let lambda_max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = f64::NEG_INFINITY;
    for _ in 0..trials {
        let c: Vec<C64> = (0..d)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm_d: f64 = c.iter().map(|x| x.norm_sqr()).sum();
        // ‖h‖²_{S,w} = c* M c with M = A*A in basis coordinates.
        let norm_s = quadratic_form(&c, &m);
        let r = norm_s / norm_d;
        ratio_min = ratio_min.min(r);
        ratio_max = ratio_max.max(r);
    }
    WbspReport {
        lambda_min,
        lambda_max,
        ratio_min,
        ratio_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state_matches_walk_constants() {
        let s = BarrierState::new(4, 0.36);
        assert!((s.gamma - 0.2).abs() < 1e-15);
        assert!((s.upper - 40.0).abs() < 1e-12);
        assert!((s.lower + 40.0).abs() < 1e-12);
        // mid = (4d/γ) / (2γ/(1−γ²))
        assert!((s.mid - 80.0 * 0.96 / 0.4).abs() < 1e-9);
        assert!(!s.finished());
        let (_, phi, _, _) = s.potential().unwrap();
        assert!((phi - 2.0 * 4.0 / 40.0).abs() < 1e-12);
    }

    #[test]
    fn eps_outside_unit_interval_is_rejected() {
        let fam = FnFamily::new(1, |_: &usize, out: &mut [C64]| out[0] = C64::new(1.0, 0.0));
        let mut rng = RngStream::new(0, 0);
        let cfg = WbspConfig::default();
        assert!(rand_bss_plus(&fam, &[0usize, 1], &[0.5, 0.5], 1.0, &cfg, &mut rng).is_err());
        assert!(rand_bss_plus(&fam, &[0usize, 1], &[0.5, 0.5], 0.0, &cfg, &mut rng).is_err());
    }
}
