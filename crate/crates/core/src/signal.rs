//! Fourier-sparse signals and their JSON encodings.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Anything that can be evaluated at a point of `R^dim`.
pub trait SignalFn: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: &[f64]) -> C64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tone {
    pub freq: Vec<f64>,
    pub coeff: C64,
}

impl Tone {
    pub fn new(freq: Vec<f64>, coeff: C64) -> Self {
        Self { freq, coeff }
    }
}

/// `x(t) = Σ_j v_j exp(2πi <f_j, t>)` observed on `[0, T]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSparseSignal {
    dim: usize,
    horizon: f64,
    terms: Vec<Tone>,
}

impl FourierSparseSignal {
    pub fn new(dim: usize, horizon: f64, terms: Vec<Tone>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        for tone in &terms {
            if tone.freq.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: tone.freq.len(),
                });
            }
        }
        for i in 0..terms.len() {
            for j in 0..i {
                if terms[i].freq == terms[j].freq {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate frequency {:?}",
                        terms[i].freq
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            horizon,
            terms,
        })
    }

    pub fn one_dim(horizon: f64, freqs: &[f64], coeffs: &[C64]) -> Result<Self> {
        if freqs.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: freqs.len(),
                found: coeffs.len(),
            });
        }
        let terms = freqs
            .iter()
            .zip(coeffs)
            .map(|(&f, &v)| Tone::new(vec![f], v))
            .collect();
        Self::new(1, horizon, terms)
    }

    pub fn from_parts(
        dim: usize,
        horizon: f64,
        freqs: &[Vec<f64>],
        coeffs: &[C64],
    ) -> Result<Self> {
        if freqs.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: freqs.len(),
                found: coeffs.len(),
            });
        }
        let terms = freqs
            .iter()
            .zip(coeffs)
            .map(|(f, &v)| Tone::new(f.clone(), v))
            .collect();
        Self::new(dim, horizon, terms)
    }

    /// The zero signal.
    pub fn zero(dim: usize, horizon: f64) -> Result<Self> {
        Self::new(dim, horizon, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn terms(&self) -> &[Tone] {
        &self.terms
    }

    pub fn sparsity(&self) -> usize {
        self.terms.len()
    }

    pub fn freqs(&self) -> Vec<Vec<f64>> {
        self.terms.iter().map(|t| t.freq.clone()).collect()
    }

    pub fn coeffs(&self) -> Vec<C64> {
        self.terms.iter().map(|t| t.coeff).collect()
    }

    /// `‖x̂‖₁ = Σ |v_j|`.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// Minimum pairwise `‖f_i − f_j‖_∞`, `None` below two terms.
    pub fn min_gap(&self) -> Option<f64> {
        let mut gap: Option<f64> = None;
        for i in 0..self.terms.len() {
            for j in 0..i {
                let d = linf(&self.terms[i].freq, &self.terms[j].freq);
                gap = Some(gap.map_or(d, |g| g.min(d)));
            }
        }
        gap
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Tone::new(t.freq.clone(), t.coeff * factor))
            .collect();
        Self {
            dim: self.dim,
            horizon: self.horizon,
            terms,
        }
    }

    /// `self + factor·other`, merging tones at bit-identical frequencies.
    pub fn add_scaled(&self, other: &Self, factor: C64) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut merged: BTreeMap<Vec<u64>, (Vec<f64>, C64)> = BTreeMap::new();
        let mut order: Vec<Vec<u64>> = Vec::new();
        let terms = self
            .terms
            .iter()
            .map(|t| (t, C64::new(1.0, 0.0)))
            .chain(other.terms.iter().map(|t| (t, factor)));
        for (tone, scale) in terms {
            let key: Vec<u64> = tone.freq.iter().map(|f| (f + 0.0).to_bits()).collect();
            match merged.get_mut(&key) {
                Some(entry) => entry.1 += tone.coeff * scale,
                None => {
                    order.push(key.clone());
                    merged.insert(key, (tone.freq.clone(), tone.coeff * scale));
                }
            }
        }
        let terms = order
            .into_iter()
            .map(|k| {
                let (freq, coeff) = merged.remove(&k).expect("key recorded on insert");
                Tone::new(freq, coeff)
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            horizon: self.horizon,
            terms,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.dim, horizon, self.terms.clone())
    }
}

impl SignalFn for FourierSparseSignal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: &[f64]) -> C64 {
        debug_assert_eq!(t.len(), self.dim);
        self.terms
            .iter()
            .map(|tone| {
                let phase: f64 = tone.freq.iter().zip(t).map(|(f, x)| f * x).sum();
                tone.coeff * C64::from_polar(1.0, 2.0 * PI * phase)
            })
            .sum()
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Serialize, Deserialize)]
struct ToneJson {
    freq: Vec<f64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SignalJson {
    dim: usize,
    #[serde(rename = "T")]
    horizon: f64,
    terms: Vec<ToneJson>,
}

impl Serialize for FourierSparseSignal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SignalJson {
            dim: self.dim,
            horizon: self.horizon,
            terms: self
                .terms
                .iter()
                .map(|t| ToneJson {
                    freq: t.freq.clone(),
                    re: t.coeff.re,
                    im: t.coeff.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourierSparseSignal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SignalJson::deserialize(d)?;
        let terms = raw
            .terms
            .into_iter()
            .map(|t| Tone::new(t.freq, C64::new(t.re, t.im)))
            .collect();
        FourierSparseSignal::new(raw.dim, raw.horizon, terms).map_err(serde::de::Error::custom)
    }
}

/// A signal on `[p]^d`, stored row-major: `t ↦ Σ_c t_c p^(d−1−c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSignal {
    side: usize,
    dim: usize,
    values: Vec<C64>,
}

impl DiscreteSignal {
    pub fn new(side: usize, dim: usize, values: Vec<C64>) -> Result<Self> {
        if side == 0 || dim == 0 {
            return Err(Error::InvalidArgument("side and dim must be positive".into()));
        }
        let n = checked_len(side, dim)?;
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: values.len(),
            });
        }
        Ok(Self { side, dim, values })
    }

    pub fn zeros(side: usize, dim: usize) -> Result<Self> {
        let n = checked_len(side, dim)?;
        Self::new(side, dim, vec![C64::new(0.0, 0.0); n])
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn at(&self, t: &[usize]) -> C64 {
        self.values[flat_index(t, self.side)]
    }
}

fn checked_len(side: usize, dim: usize) -> Result<usize> {
    u32::try_from(dim)
        .ok()
        .and_then(|d| side.checked_pow(d))
        .ok_or_else(|| Error::InvalidArgument(format!("{side}^{dim} overflows")))
}

/// Row-major flat index of `t ∈ [p]^d`.
pub fn flat_index(t: &[usize], side: usize) -> usize {
    t.iter().fold(0, |acc, &c| {
        debug_assert!(c < side);
        acc * side + c
    })
}

/// Inverse of [`flat_index`].
pub fn unflatten(mut index: usize, side: usize, dim: usize) -> Vec<usize> {
    let mut t = vec![0; dim];
    for c in (0..dim).rev() {
        t[c] = index % side;
        index /= side;
    }
    t
}

#[derive(Serialize, Deserialize)]
struct DiscreteJson {
    p: usize,
    dim: usize,
    values: Vec<[f64; 2]>,
}

impl Serialize for DiscreteSignal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiscreteJson {
            p: self.side,
            dim: self.dim,
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteSignal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DiscreteJson::deserialize(d)?;
        let values = raw.values.iter().map(|v| C64::new(v[0], v[1])).collect();
        DiscreteSignal::new(raw.p, raw.dim, values).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_json_shape() {
        let x = FourierSparseSignal::one_dim(2.0, &[0.5], &[C64::new(1.0, -2.0)]).unwrap();
        let json = serde_json::to_value(&x).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"dim":1,"T":2.0,"terms":[{"freq":[0.5],"re":1.0,"im":-2.0}]})
        );
        let back: FourierSparseSignal = serde_json::from_value(json).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn rejects_bad_signals() {
        assert!(FourierSparseSignal::new(2, 1.0, vec![Tone::new(vec![1.0], C64::new(1.0, 0.0))])
            .is_err());
        assert!(FourierSparseSignal::one_dim(0.0, &[1.0], &[C64::new(1.0, 0.0)]).is_err());
        assert!(FourierSparseSignal::one_dim(
            1.0,
            &[1.0, 1.0],
            &[C64::new(1.0, 0.0), C64::new(2.0, 0.0)]
        )
        .is_err());
    }

    #[test]
    fn discrete_json_and_layout() {
        let vals: Vec<C64> = (0..9).map(|i| C64::new(i as f64, 0.0)).collect();
        let x = DiscreteSignal::new(3, 2, vals).unwrap();
        assert_eq!(x.at(&[1, 2]).re, 5.0);
        assert_eq!(unflatten(5, 3, 2), vec![1, 2]);
        let json = serde_json::to_string(&x).unwrap();
        let back: DiscreteSignal = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
        assert!(DiscreteSignal::new(3, 2, vec![C64::new(0.0, 0.0); 8]).is_err());
    }

    #[test]
    fn difference_merges_shared_frequencies() {
        let a = FourierSparseSignal::one_dim(1.0, &[1.0, 2.0], &[C64::new(1.0, 0.0); 2]).unwrap();
        let b = FourierSparseSignal::one_dim(1.0, &[2.0, 3.0], &[C64::new(1.0, 0.0); 2]).unwrap();
        let d = a.sub(&b).unwrap();
        assert_eq!(d.sparsity(), 3);
        assert_eq!(d.terms()[1].coeff, C64::new(0.0, 0.0));
    }

    #[test]
    fn min_gap_uses_sup_norm() {
        let x = FourierSparseSignal::from_parts(
            2,
            1.0,
            &[vec![0.0, 0.0], vec![0.5, 2.0], vec![3.0, 0.25]],
            &[C64::new(1.0, 0.0); 3],
        )
        .unwrap();
        assert_eq!(x.min_gap(), Some(2.0));
    }
}
