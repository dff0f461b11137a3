//! Sample access with an auditable query counter.

use std::f64::consts::PI;

use crate::signal::{flat_index, DiscreteSignal, FourierSparseSignal, SignalFn, C64};

/// Additive noise `g(t)`: a sparse tone component plus deterministic white
/// noise. The white part is a hash of `(seed, t)`, so it is a fixed function
/// of time with `E|g(t)|² = σ²` at every point.
#[derive(Debug, Clone)]
pub struct ContinuousNoise {
    pub tones: Option<FourierSparseSignal>,
    pub white_sigma: f64,
    pub white_seed: u64,
    dim: usize,
}

impl ContinuousNoise {
    pub fn none(dim: usize) -> Self {
        Self {
            tones: None,
            white_sigma: 0.0,
            white_seed: 0,
            dim,
        }
    }

    pub fn new(dim: usize, tones: Option<FourierSparseSignal>, white_sigma: f64, white_seed: u64) -> Self {
        Self {
            tones,
            white_sigma,
            white_seed,
            dim,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.white_sigma == 0.0 && self.tones.as_ref().is_none_or(|t| t.sparsity() == 0)
    }

    /// `‖tones‖_T² + σ²`; exact for the tone part, expected value for the white part.
    pub fn energy(&self) -> f64 {
        let tones = self
            .tones
            .as_ref()
            .map_or(0.0, crate::norm::continuous_norm_sq);
        tones + self.white_sigma * self.white_sigma
    }

    fn white(&self, t: &[f64]) -> C64 {
        if self.white_sigma == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let mut h = splitmix(self.white_seed ^ 0x9e37_79b9_7f4a_7c15);
        for x in t {
            h = splitmix(h ^ (x + 0.0).to_bits());
        }
        let u1 = unit_open(h);
        let u2 = unit_open(splitmix(h));
        // Box-Muller; each component has variance σ²/2.
        let r = (-2.0 * u1.ln()).sqrt() * self.white_sigma / std::f64::consts::SQRT_2;
        C64::from_polar(r, 2.0 * PI * u2)
    }
}

impl SignalFn for ContinuousNoise {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: &[f64]) -> C64 {
        let tone = self.tones.as_ref().map_or(C64::new(0.0, 0.0), |s| s.eval(t));
        tone + self.white(t)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Access to `x(t) + g(t)`; every call to [`NoisyOracle::query`] counts as one sample.
pub struct NoisyOracle<'a> {
    signal: &'a dyn SignalFn,
    noise: Option<&'a dyn SignalFn>,
    queries: u64,
}

impl<'a> NoisyOracle<'a> {
    pub fn new(signal: &'a dyn SignalFn, noise: Option<&'a dyn SignalFn>) -> Self {
        Self {
            signal,
            noise,
            queries: 0,
        }
    }

    pub fn noiseless(signal: &'a dyn SignalFn) -> Self {
        Self::new(signal, None)
    }

    pub fn dim(&self) -> usize {
        self.signal.dim()
    }

    pub fn query(&mut self, t: &[f64]) -> C64 {
        self.queries += 1;
        let g = self.noise.map_or(C64::new(0.0, 0.0), |g| g.eval(t));
        self.signal.eval(t) + g
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }
}

/// Counted access to the time-domain values of a [`DiscreteSignal`].
pub struct DiscreteOracle<'a> {
    signal: &'a DiscreteSignal,
    queries: u64,
}

impl<'a> DiscreteOracle<'a> {
    pub fn new(signal: &'a DiscreteSignal) -> Self {
        Self { signal, queries: 0 }
    }

    pub fn side(&self) -> usize {
        self.signal.side()
    }

    pub fn dim(&self) -> usize {
        self.signal.dim()
    }

    pub fn query(&mut self, t: &[usize]) -> C64 {
        self.queries += 1;
        self.signal.values()[flat_index(t, self.signal.side())]
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_tracks_every_query() {
        let x = FourierSparseSignal::one_dim(1.0, &[1.0], &[C64::new(1.0, 0.0)]).unwrap();
        let mut o = NoisyOracle::noiseless(&x);
        for i in 0..17 {
            o.query(&[i as f64 * 0.01]);
        }
        assert_eq!(o.queries(), 17);
    }

    #[test]
    fn white_noise_is_a_fixed_function_with_unit_power() {
        let g = ContinuousNoise::new(1, None, 1.0, 42);
        assert_eq!(g.eval(&[0.25]), g.eval(&[0.25]));
        let m = 200_000;
        let mean: f64 = (0..m)
            .map(|i| g.eval(&[i as f64 / m as f64]).norm_sqr())
            .sum::<f64>()
            / m as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
        assert!((g.energy() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_is_transparent() {
        let x = FourierSparseSignal::one_dim(1.0, &[0.3], &[C64::new(2.0, 0.0)]).unwrap();
        let g = ContinuousNoise::none(1);
        assert!(g.is_zero());
        let mut o = NoisyOracle::new(&x, Some(&g));
        assert_eq!(o.query(&[0.4]), x.eval(&[0.4]));
    }
}
