//! Multi-dimensional DFT on `[p]^d`.
//!
//! Forward: `x̂_f = Σ_t x_t exp(−2πi⟨f,t⟩/p)`; inverse carries the `1/n`,
//! `x_t = (1/n) Σ_f x̂_f exp(2πi⟨f,t⟩/p)`. Applied axis by axis with a
//! naive O(p) inner sum, so the cost is O(n·p·d).

use std::f64::consts::PI;

use crate::signal::{DiscreteSignal, C64};

pub fn dft(signal: &DiscreteSignal) -> Vec<C64> {
    transform(signal.values(), signal.side(), signal.dim(), -1.0)
}

/// Inverse of [`dft`], returning time-domain values.
pub fn idft(spectrum: &[C64], side: usize, dim: usize) -> Vec<C64> {
    let n = spectrum.len() as f64;
    let mut out = transform(spectrum, side, dim, 1.0);
    out.iter_mut().for_each(|v| *v /= n);
    out
}

fn transform(input: &[C64], side: usize, dim: usize, sign: f64) -> Vec<C64> {
    let twiddle: Vec<C64> = (0..side)
        .map(|j| C64::from_polar(1.0, sign * 2.0 * PI * j as f64 / side as f64))
        .collect();
    let mut data = input.to_vec();
    let mut line = vec![C64::new(0.0, 0.0); side];
    // stride of axis c in row-major order is p^(d-1-c)
    let mut stride = 1;
    for _axis in 0..dim {
        let block = stride * side;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (f, slot) in line.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for t in 0..side {
                        acc += data[start + t * stride] * twiddle[(f * t) % side];
                    }
                    *slot = acc;
                }
                for (t, v) in line.iter().enumerate() {
                    data[start + t * stride] = *v;
                }
            }
        }
        stride = block;
    }
    data
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::unflatten;

    fn brute_force(x: &DiscreteSignal) -> Vec<C64> {
        let (p, d) = (x.side(), x.dim());
        (0..x.len())
            .map(|fi| {
                let f = unflatten(fi, p, d);
                (0..x.len())
                    .map(|ti| {
                        let t = unflatten(ti, p, d);
                        let dot: usize = f.iter().zip(&t).map(|(a, b)| a * b).sum();
                        x.values()[ti]
                            * C64::from_polar(1.0, -2.0 * PI * (dot % p) as f64 / p as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let mut vals = vec![C64::new(0.0, 0.0); 4];
        vals[0] = C64::new(1.0, 0.0);
        let x = DiscreteSignal::new(4, 1, vals).unwrap();
        for v in dft(&x) {
            assert!((v - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn separable_transform_matches_definition() {
        let vals: Vec<C64> = (0..27)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let x = DiscreteSignal::new(3, 3, vals).unwrap();
        let fast = dft(&x);
        let slow = brute_force(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip() {
        let vals: Vec<C64> = (0..64)
            .map(|i| C64::new((i as f64).sqrt(), -(i as f64) * 0.1))
            .collect();
        let x = DiscreteSignal::new(8, 2, vals.clone()).unwrap();
        let back = idft(&dft(&x), 8, 2);
        for (a, b) in back.iter().zip(&vals) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
