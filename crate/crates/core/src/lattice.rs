//! Lattices of candidate frequencies: ball enumeration, candidate expansion,
//! count bounds, and snapping arbitrary spectra onto a grid.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{FourierSparseSignal, Tone, C64};

/// Above this many coefficient vectors, [`enumerate_ball`] refuses to run.
pub const MAX_BOX_POINTS: f64 = 1e7;
/// Coefficients below this fraction of `Σ|v|` are dropped after snapping.
pub const SNAP_DROP_TOLERANCE: f64 = 1e-12;

/// `Λ(B) = { B·c : c ∈ Z^m }` for a `d×m` basis with independent columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BasisJson", into = "BasisJson")]
pub struct LatticeBasis {
    columns: DMatrix<f64>,
    gram_schmidt: DMatrix<f64>,
    pinv: DMatrix<f64>,
    sigma_min: f64,
    sigma_max: f64,
    volume: f64,
}

#[derive(Serialize, Deserialize)]
struct BasisJson {
    columns: Vec<Vec<f64>>,
}

impl TryFrom<BasisJson> for LatticeBasis {
    type Error = Error;

    fn try_from(raw: BasisJson) -> Result<Self> {
        Self::from_columns(&raw.columns)
    }
}

impl From<LatticeBasis> for BasisJson {
    fn from(b: LatticeBasis) -> Self {
        BasisJson {
            columns: b.columns.column_iter().map(|c| c.iter().cloned().collect()).collect(),
        }
    }
}

impl LatticeBasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let (d, m) = columns.shape();
        if d == 0 || m == 0 {
            return Err(Error::EmptyInput);
        }
        if m > d {
            return Err(Error::RankDeficient { ratio: 0.0 });
        }
        if columns.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("basis entries must be finite".into()));
        }
        let svd = columns.clone().svd(true, true);
        let sigma_max = svd.singular_values.max();
        let sigma_min = svd.singular_values.min();
        if !(sigma_min > 1e-10 * sigma_max) {
            return Err(Error::RankDeficient {
                ratio: sigma_min / sigma_max,
            });
        }
        let pinv = svd
            .pseudo_inverse(0.0)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut gs = columns.clone();
        for j in 0..m {
            for i in 0..j {
                let bi = gs.column(i).clone_owned();
                let mu = bi.dot(&columns.column(j)) / bi.norm_squared();
                gs.column_mut(j).axpy(-mu, &bi, 1.0);
            }
        }
        let volume = gs.column_iter().map(|c| c.norm()).product();
        Ok(Self {
            columns,
            gram_schmidt: gs,
            pinv,
            sigma_min,
            sigma_max,
            volume,
        })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.first().ok_or(Error::EmptyInput)?.len();
        if let Some(c) = columns.iter().find(|c| c.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.len(),
            });
        }
        Self::new(DMatrix::from_fn(d, columns.len(), |i, j| columns[j][i]))
    }

    /// `η·I_d`, the grid of pitch `η`.
    pub fn grid(dim: usize, eta: f64) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim) * eta)
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    /// Number of basis vectors `m`.
    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn gram_schmidt(&self) -> &DMatrix<f64> {
        &self.gram_schmidt
    }

    /// `min_i ‖b*_i‖`, a lower bound on the shortest nonzero vector.
    pub fn min_gs_norm(&self) -> f64 {
        self.gram_schmidt
            .column_iter()
            .map(|c| c.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// Spectral norm `‖B‖`.
    pub fn norm(&self) -> f64 {
        self.sigma_max
    }

    /// `√det(BᵀB)`, the volume of the fundamental parallelepiped.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn point(&self, coeffs: &[i64]) -> Vec<f64> {
        let c = DVector::from_iterator(coeffs.len(), coeffs.iter().map(|&x| x as f64));
        (&self.columns * c).iter().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub coeffs: Vec<i64>,
    pub point: Vec<f64>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Membership in the closed ball, with a relative slack of `1e−12` so that
/// points on the sphere are not lost to rounding.
pub fn in_ball(point: &[f64], center: &[f64], radius: f64) -> bool {
    let scale = 1.0 + radius + center.iter().map(|c| c.abs()).fold(0.0, f64::max);
    distance(point, center) <= radius + 1e-12 * scale
}

/// Integer ranges `[lo_i, hi_i]` containing every `c` with `‖Bc − center‖ ≤ r`.
///
/// Writing `c₀ = B⁺·center`, `B(c − c₀)` is the part of `Bc − center` inside
/// the column span, so `‖c − c₀‖ ≤ r/σ_min`.
fn coefficient_box(basis: &LatticeBasis, center: &[f64], radius: f64) -> Result<Vec<(i64, i64)>> {
    let c0 = &basis.pinv * DVector::from_column_slice(center);
    let half = radius / basis.sigma_min + 1.0;
    let ranges: Vec<(i64, i64)> = c0
        .iter()
        .map(|&c| ((c - half).floor() as i64, (c + half).ceil() as i64))
        .collect();
    let count: f64 = ranges.iter().map(|(lo, hi)| (hi - lo + 1) as f64).product();
    if count > MAX_BOX_POINTS {
        return Err(Error::CoefficientBoxOverflow { count });
    }
    Ok(ranges)
}

/// Calls `visit` on every integer vector in the box, last coordinate fastest.
pub fn for_each_in_box(ranges: &[(i64, i64)], mut visit: impl FnMut(&[i64])) {
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut c: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        visit(&c);
        let mut axis = c.len();
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if c[axis] < ranges[axis].1 {
                c[axis] += 1;
                break;
            }
            c[axis] = ranges[axis].0;
        }
    }
}

/// All lattice points in the closed Euclidean ball `B(center, r)`.
pub fn enumerate_ball(basis: &LatticeBasis, center: &[f64], radius: f64) -> Result<Vec<LatticePoint>> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be nonnegative, got {radius}")));
    }
    if center.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: center.len(),
        });
    }
    let ranges = coefficient_box(basis, center, radius)?;
    let mut out = Vec::new();
    for_each_in_box(&ranges, |c| {
        let p = basis.point(c);
        if in_ball(&p, center, radius) {
            out.push(LatticePoint {
                coeffs: c.to_vec(),
                point: p,
            });
        }
    });
    Ok(out)
}

/// Lattice frequencies near a list of frequency estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub candidates: Vec<Vec<f64>>,
    pub coefficients: Vec<Vec<i64>>,
    pub sources: Vec<Vec<f64>>,
    pub radius: f64,
    /// Total of the per-source counts, before deduplication.
    pub raw_count: usize,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Union of [`enumerate_ball`] around each source, deduplicated by integer
/// coefficient vector in first-seen order.
pub fn expand_candidates(basis: &LatticeBasis, sources: &[Vec<f64>], radius: f64) -> Result<CandidateSet> {
    if sources.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    let mut set = CandidateSet {
        candidates: Vec::new(),
        coefficients: Vec::new(),
        sources: sources.to_vec(),
        radius,
        raw_count: 0,
    };
    for center in sources {
        let pts = enumerate_ball(basis, center, radius)?;
        set.raw_count += pts.len();
        for p in pts {
            if seen.insert(p.coeffs.clone(), ()).is_none() {
                set.candidates.push(p.point);
                set.coefficients.push(p.coeffs);
            }
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityBounds {
    /// `|L|·(1 + 2r/σ_min)^m`.
    pub spectral: f64,
    /// `|L|·(r + √m‖B‖)^m · π^{m/2} / Γ(m/2+1) / vol(B)`.
    pub volume: f64,
    /// Set when `2r < min‖b*_i‖`: each ball then holds at most one lattice point.
    pub tiny: bool,
}

/// `Γ(m/2 + 1)` for integer `m ≥ 0`.
pub fn gamma_half_plus_one(m: usize) -> f64 {
    let mut g = 1.0;
    let mut x = m as f64 / 2.0;
    while x > 0.75 {
        g *= x;
        x -= 1.0;
    }
    if m % 2 == 1 {
        g *= PI.sqrt() / 2.0;
    }
    g
}

pub fn sparsity_bounds(basis: &LatticeBasis, sources: usize, radius: f64) -> SparsityBounds {
    let m = basis.rank();
    let mf = m as f64;
    let l = sources as f64;
    let spectral = l * (1.0 + 2.0 * radius / basis.sigma_min).powi(m as i32);
    let ball = PI.powf(mf / 2.0) / gamma_half_plus_one(m);
    let volume = l * (radius + mf.sqrt() * basis.norm()).powi(m as i32) * ball / basis.volume;
    SparsityBounds {
        spectral,
        volume,
        tiny: 2.0 * radius < basis.min_gs_norm(),
    }
}

/// Nearest multiple of `gamma`, ties toward −∞.
fn grid_index(f: f64, gamma: f64) -> i64 {
    (f / gamma - 0.5).ceil() as i64
}

/// Moves every frequency to the nearest point of `γZ^d` (coordinatewise) and
/// merges tones that land in the same cell.
pub fn snap_to_grid(signal: &FourierSparseSignal, gamma: f64) -> Result<FourierSparseSignal> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid pitch must be positive, got {gamma}")));
    }
    let mut slot: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut keys: Vec<Vec<i64>> = Vec::new();
    let mut sums: Vec<C64> = Vec::new();
    for tone in signal.terms() {
        let key: Vec<i64> = tone.freq.iter().map(|&f| grid_index(f, gamma)).collect();
        let pos = *slot.entry(key.clone()).or_insert_with(|| {
            keys.push(key);
            sums.push(C64::new(0.0, 0.0));
            sums.len() - 1
        });
        sums[pos] += tone.coeff;
    }
    let floor = SNAP_DROP_TOLERANCE * signal.coeff_l1();
    let terms = keys
        .into_iter()
        .zip(sums)
        .filter(|(_, v)| v.norm() >= floor && *v != C64::new(0.0, 0.0))
        .map(|(key, v)| Tone::new(key.iter().map(|&i| i as f64 * gamma).collect(), v))
        .collect();
    FourierSparseSignal::new(signal.dim(), signal.horizon(), terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_ball_of_radius_one_and_a_half() {
        let b = LatticeBasis::grid(2, 1.0).unwrap();
        assert_eq!(enumerate_ball(&b, &[0.0, 0.0], 1.5).unwrap().len(), 9);
        assert_eq!(enumerate_ball(&b, &[0.0, 0.0], 0.5).unwrap().len(), 1);
        let on = enumerate_ball(&b, &[2.0, -3.0], 0.0).unwrap();
        assert_eq!(on.len(), 1);
        assert_eq!(on[0].coeffs, vec![2, -3]);
    }

    #[test]
    fn one_dim_spectral_bound_closed_form() {
        let b = LatticeBasis::grid(1, 0.5).unwrap();
        let s = sparsity_bounds(&b, 3, 1.25);
        assert!((s.spectral - 3.0 * (1.0 + 2.0 * 1.25 / 0.5)).abs() < 1e-12);
    }

    #[test]
    fn ties_round_down() {
        assert_eq!(grid_index(0.5, 1.0), 0);
        assert_eq!(grid_index(-0.5, 1.0), -1);
        assert_eq!(grid_index(0.51, 1.0), 1);
    }

    #[test]
    fn dependent_columns_are_rejected() {
        let err = LatticeBasis::from_columns(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }));
    }

    #[test]
    fn huge_box_overflows() {
        let b = LatticeBasis::grid(3, 1e-3).unwrap();
        assert!(matches!(
            enumerate_ball(&b, &[0.0; 3], 1.0),
            Err(Error::CoefficientBoxOverflow { .. })
        ));
    }

    #[test]
    fn basis_json_round_trip() {
        let b = LatticeBasis::from_columns(&[vec![1.0, 0.5], vec![0.0, 2.0]]).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        assert_eq!(text, r#"{"columns":[[1.0,0.5],[0.0,2.0]]}"#);
        let back: LatticeBasis = serde_json::from_str(&text).unwrap();
        assert_eq!(back.columns(), b.columns());
    }
}
