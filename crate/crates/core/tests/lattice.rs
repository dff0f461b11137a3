mod common;

use common::{complex_gaussian, uniform};
use nalgebra::DMatrix;
use rand::Rng;
use sfts_core::lattice::{
    enumerate_ball, expand_candidates, for_each_in_box, gamma_half_plus_one, in_ball, snap_to_grid,
    sparsity_bounds, LatticeBasis,
};
use sfts_core::norm::continuous_norm_sq;
use sfts_core::{Error, FourierSparseSignal, RngStream, Tone, C64};
use statrs::function::gamma::gamma;

/// A well-conditioned random basis with entries in `[0.5, 2]` (random signs).
fn random_basis(rng: &mut RngStream) -> LatticeBasis {
    loop {
        let m = rng.random_range(1..=3);
        let d = rng.random_range(m..=3);
        let cols = DMatrix::from_fn(d, m, |_, _| {
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            s * uniform(rng, 0.5, 2.0)
        });
        if let Ok(b) = LatticeBasis::new(cols) {
            if b.sigma_min() > 0.2 {
                return b;
            }
        }
    }
}

/// The wide box `|c_i| ≤ (r + ‖center‖)/σ_min + 1`, filtered by distance.
fn brute_force(basis: &LatticeBasis, center: &[f64], radius: f64) -> Vec<Vec<i64>> {
    let norm = center.iter().map(|c| c * c).sum::<f64>().sqrt();
    let h = ((radius + norm) / basis.sigma_min() + 1.0).ceil() as i64;
    let ranges = vec![(-h, h); basis.rank()];
    let mut out = Vec::new();
    for_each_in_box(&ranges, |c| {
        if in_ball(&basis.point(c), center, radius) {
            out.push(c.to_vec());
        }
    });
    out.sort();
    out
}

#[test]
fn enumeration_matches_brute_force_and_bounds_hold() {
    let mut rng = RngStream::new(2024, 0);
    let mut tiny_cases = 0;
    for _ in 0..100 {
        let b = random_basis(&mut rng);
        let center: Vec<f64> = (0..b.dim()).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
        let radius = if rng.random::<f64>() < 0.3 {
            uniform(&mut rng, 0.0, 0.5 * b.min_gs_norm())
        } else {
            uniform(&mut rng, 0.0, 3.0)
        };
        let mut got: Vec<Vec<i64>> = enumerate_ball(&b, &center, radius)
            .unwrap()
            .into_iter()
            .map(|p| p.coeffs)
            .collect();
        got.sort();
        assert_eq!(got, brute_force(&b, &center, radius));
        let bounds = sparsity_bounds(&b, 1, radius);
        let count = got.len() as f64;
        assert!(bounds.spectral >= count, "{} < {count}", bounds.spectral);
        assert!(bounds.volume >= count, "{} < {count}", bounds.volume);
        if bounds.tiny {
            tiny_cases += 1;
            assert!(count <= 1.0);
        }
    }
    assert!(tiny_cases > 10);
}

#[test]
fn cached_volume_matches_gram_determinant() {
    let mut rng = RngStream::new(5, 0);
    for _ in 0..50 {
        let b = random_basis(&mut rng);
        let g = b.columns().transpose() * b.columns();
        assert!((g.determinant().sqrt() - b.volume()).abs() < 1e-9 * b.volume().max(1.0));
        let gs = b.gram_schmidt();
        for i in 0..gs.ncols() {
            for j in 0..i {
                assert!(gs.column(i).dot(&gs.column(j)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn identity_spectral_bound_example() {
    let b = LatticeBasis::grid(2, 1.0).unwrap();
    let s = sparsity_bounds(&b, 1, 1.5);
    assert_eq!(s.spectral, 16.0);
    assert!(s.spectral >= enumerate_ball(&b, &[0.0, 0.0], 1.5).unwrap().len() as f64);
}

#[test]
fn gamma_matches_reference() {
    for m in 0..12 {
        let want = gamma(m as f64 / 2.0 + 1.0);
        assert!((gamma_half_plus_one(m) - want).abs() < 1e-12 * want);
    }
}

#[test]
fn exact_lattice_source_with_small_radius_is_itself() {
    let b = LatticeBasis::from_columns(&[vec![1.0, 0.3], vec![-0.2, 1.1]]).unwrap();
    let p = b.point(&[3, -2]);
    let set = expand_candidates(&b, std::slice::from_ref(&p), 0.4 * b.min_gs_norm()).unwrap();
    assert_eq!(set.coefficients, vec![vec![3, -2]]);
}

#[test]
fn one_dim_grid_matches_rounding_oracle() {
    let eta = 0.37;
    let b = LatticeBasis::grid(1, eta).unwrap();
    let mut rng = RngStream::new(9, 0);
    for _ in 0..50 {
        let sources: Vec<Vec<f64>> = (0..3).map(|_| vec![uniform(&mut rng, -5.0, 5.0)]).collect();
        let r = 2.5 * eta;
        let set = expand_candidates(&b, &sources, r).unwrap();
        assert!(set.raw_count <= 3 * (1 + 2 * 2) + 3);
        let mut want: Vec<i64> = Vec::new();
        for s in &sources {
            let lo = ((s[0] - r) / eta).ceil() as i64;
            let hi = ((s[0] + r) / eta).floor() as i64;
            want.extend(lo..=hi);
        }
        want.sort();
        want.dedup();
        let mut got: Vec<i64> = set.coefficients.iter().map(|c| c[0]).collect();
        got.sort();
        assert_eq!(got, want);
        assert!(set.len() <= set.raw_count);
    }
}

#[test]
fn overlapping_sources_are_deduplicated() {
    let b = LatticeBasis::grid(2, 1.0).unwrap();
    let set = expand_candidates(&b, &[vec![0.0, 0.0], vec![0.5, 0.0]], 1.2).unwrap();
    assert!(set.len() < set.raw_count);
    let mut keys = set.coefficients.clone();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), set.len());
    for (c, s) in set.candidates.iter().zip(&set.coefficients) {
        assert!(set.sources.iter().any(|l| in_ball(c, l, 1.2)));
        assert_eq!(*c, b.point(s));
    }
}

#[test]
fn empty_sources_and_negative_radius_are_rejected() {
    let b = LatticeBasis::grid(1, 1.0).unwrap();
    assert!(matches!(expand_candidates(&b, &[], 1.0), Err(Error::EmptyInput)));
    assert!(enumerate_ball(&b, &[0.0], -1.0).is_err());
}

#[test]
fn snapping_on_grid_is_identity() {
    let x = FourierSparseSignal::one_dim(1.0, &[0.25, -1.5, 3.0], &[C64::new(1.0, 2.0); 3]).unwrap();
    assert_eq!(snap_to_grid(&x, 0.25).unwrap(), x);
}

#[test]
fn cancelling_tones_vanish() {
    let x = FourierSparseSignal::one_dim(1.0, &[1.01, 0.99, 5.0], &[
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 1.0),
    ])
    .unwrap();
    let y = snap_to_grid(&x, 0.5).unwrap();
    assert_eq!(y.sparsity(), 1);
    assert_eq!(y.freqs(), vec![vec![5.0]]);
}

#[test]
fn snapping_error_is_small_and_shrinks_with_pitch() {
    let (t, band, eps): (f64, f64, f64) = (1.0, 20.0, 0.05);
    let eps1 = eps * eps / t;
    let f0 = band + (band / eps1).ln().sqrt() / t;
    let gamma0 = eps / (f0 * t.powi(3)).sqrt();
    let mut monotone = 0;
    for seed in 0..50 {
        let mut rng = RngStream::new(seed, 0);
        let terms: Vec<Tone> = (0..5)
            .map(|_| Tone::new(vec![uniform(&mut rng, -band, band)], complex_gaussian(&mut rng)))
            .collect();
        let x = FourierSparseSignal::new(1, t, terms).unwrap();
        let err = |g: f64| continuous_norm_sq(&snap_to_grid(&x, g).unwrap().sub(&x).unwrap());
        let l1 = x.coeff_l1();
        assert!(err(gamma0) <= 10.0 * eps * eps * l1 * l1);
        let eta = 1.0 / t;
        let ladder = [err(eta / 2.0), err(eta / 4.0), err(eta / 8.0)];
        if ladder[0] >= ladder[1] && ladder[1] >= ladder[2] {
            monotone += 1;
        }
        let wide = [err(gamma0), err(gamma0 / 4.0), err(gamma0 / 16.0)];
        assert!(wide[0] >= wide[1] && wide[1] >= wide[2], "seed {seed}: {wide:?}");
    }
    // Cross terms between tones can reverse a halving step on a few signals.
    assert!(monotone >= 45, "{monotone}/50");
}

#[test]
fn planar_snap_is_coordinatewise() {
    let x = FourierSparseSignal::new(2, 1.0, vec![Tone::new(vec![0.26, -0.74], C64::new(1.0, 0.0))]).unwrap();
    let y = snap_to_grid(&x, 0.5).unwrap();
    assert_eq!(y.freqs(), vec![vec![0.5, -0.5]]);
}
