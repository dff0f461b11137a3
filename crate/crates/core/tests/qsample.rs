mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use sfts_core::qsample::{BlockedQuadraticFormTree, QuadraticFormTree, QuadraticSampler};
use sfts_core::{Error, RngStream, C64};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn figure_vectors() -> Vec<Vec<C64>> {
    vec![
        vec![c(1.0), c(0.0)],
        vec![c(0.0), c(1.0)],
        vec![c(1.0), c(1.0)],
        vec![c(1.0), c(-1.0)],
    ]
}

fn probabilities(tree: &dyn QuadraticSampler, a: &DMatrix<C64>) -> Vec<f64> {
    (0..tree.len())
        .map(|i| tree.leaf_probability(a, i).unwrap())
        .collect()
}

fn assert_close(got: &[f64], want: &[f64], tol: f64) {
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
    }
}

#[test]
fn single_vector_tree_is_a_leaf() {
    let v = vec![vec![c(2.0), C64::new(0.0, 1.0)]];
    let tree = QuadraticFormTree::build(&v, &[0.5]).unwrap();
    assert_eq!(tree.node_count(), 1);
    let root = tree.node_matrix(0);
    assert!((root[(0, 0)] - c(2.0)).norm() < 1e-15);
    assert!((root[(0, 1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
    let mut rng = RngStream::new(0, 0);
    assert_eq!(tree.sample(&DMatrix::identity(2, 2), &mut rng).unwrap(), 0);
}

#[test]
fn basis_pairs_aggregate_to_diagonal_sums() {
    let v = vec![
        vec![c(1.0), c(0.0)],
        vec![c(0.0), c(1.0)],
        vec![c(1.0), c(0.0)],
        vec![c(0.0), c(1.0)],
    ];
    let alpha = [1.0, 2.0, 3.0, 4.0];
    let tree = QuadraticFormTree::build(&v, &alpha).unwrap();
    let root = tree.node_matrix(0);
    assert_eq!(root[(0, 0)], c(4.0));
    assert_eq!(root[(1, 1)], c(6.0));
    assert_eq!(root[(0, 1)], c(0.0));
}

#[test]
fn identity_query_weights_by_squared_norm() {
    let v = figure_vectors();
    let tree = QuadraticFormTree::build(&v, &[1.0; 4]).unwrap();
    let p = probabilities(&tree, &DMatrix::identity(2, 2));
    assert_close(&p, &[1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0], 1e-15);
}

#[test]
fn projector_query_zeroes_orthogonal_vector() {
    let v = figure_vectors();
    let tree = QuadraticFormTree::build(&v, &[1.0; 4]).unwrap();
    let mut a = DMatrix::zeros(2, 2);
    a[(0, 0)] = c(1.0);
    let p = probabilities(&tree, &a);
    assert_close(&p, &[1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0], 1e-15);
    let blocked = BlockedQuadraticFormTree::build(&v, &[1.0; 4]).unwrap();
    assert_close(&probabilities(&blocked, &a), &p, 1e-15);
}

#[test]
fn equal_vectors_are_uniform() {
    let v = vec![vec![c(1.0), c(2.0), c(-1.0)]; 7];
    let tree = QuadraticFormTree::build(&v, &[1.0; 7]).unwrap();
    let p = probabilities(&tree, &DMatrix::identity(3, 3));
    assert_close(&p, &[1.0 / 7.0; 7], 1e-15);
}

#[test]
fn root_matches_direct_sum() {
    let mut rng = RngStream::new(11, 0);
    let v = random_vectors(37, 5, &mut rng);
    let alpha: Vec<f64> = (0..37).map(|_| uniform(&mut rng, 0.0, 2.0)).collect();
    let tree = QuadraticFormTree::build(&v, &alpha).unwrap();
    let mut direct = DMatrix::<C64>::zeros(5, 5);
    for (vi, a) in v.iter().zip(&alpha) {
        let col = nalgebra::DVector::from_column_slice(vi);
        direct += &col * col.adjoint() * c(*a);
    }
    let root = tree.node_matrix(0);
    assert!((&root - &direct).norm() <= 1e-12 * direct.norm());
}

#[test]
fn aggregation_and_depth_invariants() {
    let mut rng = RngStream::new(12, 0);
    for n in [1usize, 2, 3, 5, 16, 37, 64] {
        let v = random_vectors(n, 3, &mut rng);
        let tree = QuadraticFormTree::build(&v, &vec![1.0; n]).unwrap();
        assert_eq!(tree.node_count(), 2 * n - 1);
        let bound = (n as f64).log2().ceil() as usize + 1;
        assert!(tree.depth() <= bound, "n={n} depth={}", tree.depth());
        for id in 0..tree.node_count() {
            if let Some((l, r)) = tree.node_children(id) {
                let parent = tree.node_matrix(id);
                let sum = tree.node_matrix(l) + tree.node_matrix(r);
                assert!((&parent - &sum).norm() <= 1e-12 * parent.norm());
            }
        }
    }
}

#[test]
fn dense_query_cost_is_logarithmic() {
    let mut rng = RngStream::new(13, 0);
    let n = 1000;
    let v = random_vectors(n, 4, &mut rng);
    let tree = QuadraticFormTree::build(&v, &vec![1.0; n]).unwrap();
    let a = random_psd(4, 4, &mut rng);
    let limit = 2 * ((n as f64).log2().ceil() as usize + 1);
    for _ in 0..50 {
        let (_, products) = tree.sample_counted(&a, &mut rng).unwrap();
        assert!(products <= limit);
    }
}

#[test]
fn blocked_leaves_store_slab_grams() {
    let mut rng = RngStream::new(14, 0);
    let v = random_vectors(22, 4, &mut rng);
    let alpha: Vec<f64> = (0..22).map(|_| uniform(&mut rng, 0.1, 1.0)).collect();
    let tree = BlockedQuadraticFormTree::build(&v, &alpha).unwrap();
    assert_eq!(tree.blocks(), 5);
    for b in 0..tree.blocks() {
        let slab = tree.slab_matrix(b);
        let v1 = tree.leaf_v1(b);
        assert!((&v1 - &slab * slab.adjoint()).norm() <= 1e-12 * v1.norm());
    }
    assert!(tree.storage_entries() <= 3 * 22 * 4);
}

#[test]
fn blocked_storage_is_linear() {
    let mut rng = RngStream::new(15, 0);
    for (n, k) in [(64, 8), (40, 8), (9, 3), (100, 7)] {
        let v = random_vectors(n, k, &mut rng);
        let tree = BlockedQuadraticFormTree::build(&v, &vec![1.0; n]).unwrap();
        assert!(tree.storage_entries() <= 3 * n * k, "n={n} k={k}");
    }
}

#[test]
fn single_block_is_diagonal_sampling() {
    let mut rng = RngStream::new(16, 0);
    let v = random_vectors(4, 4, &mut rng);
    let tree = BlockedQuadraticFormTree::build(&v, &[1.0; 4]).unwrap();
    assert_eq!(tree.blocks(), 1);
    let a = random_psd(4, 2, &mut rng);
    let slab = tree.slab_matrix(0);
    let u = slab.adjoint() * &a * &slab;
    let trace: f64 = (0..4).map(|i| u[(i, i)].re).sum();
    let want: Vec<f64> = (0..4).map(|i| u[(i, i)].re / trace).collect();
    assert_close(&probabilities(&tree, &a), &want, 1e-12);
}

#[test]
fn blocked_matches_dense_when_k_divides_n() {
    let mut rng = RngStream::new(17, 0);
    let v = random_vectors(24, 4, &mut rng);
    let dense = QuadraticFormTree::build(&v, &[1.0; 24]).unwrap();
    let blocked = BlockedQuadraticFormTree::build(&v, &[1.0; 24]).unwrap();
    let a = DMatrix::identity(4, 4);
    assert_close(&probabilities(&blocked, &a), &probabilities(&dense, &a), 1e-12);
}

#[test]
fn zero_mass_is_reported() {
    let v = vec![vec![c(1.0), c(0.0)], vec![c(2.0), c(0.0)]];
    let tree = QuadraticFormTree::build(&v, &[1.0, 1.0]).unwrap();
    let mut a = DMatrix::zeros(2, 2);
    a[(1, 1)] = c(1.0);
    let mut rng = RngStream::new(0, 0);
    assert_eq!(tree.sample(&a, &mut rng), Err(Error::ZeroMass));
    let blocked = BlockedQuadraticFormTree::build(&v, &[1.0, 1.0]).unwrap();
    assert_eq!(blocked.sample(&a, &mut rng), Err(Error::ZeroMass));
}

#[test]
fn build_rejects_bad_input() {
    assert_eq!(QuadraticFormTree::build(&[], &[]).unwrap_err(), Error::EmptyInput);
    let ragged = vec![vec![c(1.0)], vec![c(1.0), c(2.0)]];
    assert!(matches!(
        QuadraticFormTree::build(&ragged, &[1.0, 1.0]),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(BlockedQuadraticFormTree::build(&[vec![c(1.0)]], &[-1.0]).is_err());
}

#[test]
fn empirical_frequencies_pass_chi_squared() {
    let mut rng = RngStream::new(18, 0);
    let v = random_vectors(16, 3, &mut rng);
    let alpha = vec![1.0; 16];
    let a = random_psd(3, 3, &mut rng);
    let want = brute_force_distribution(&v, &alpha, &a);
    let dense = QuadraticFormTree::build(&v, &alpha).unwrap();
    let blocked = BlockedQuadraticFormTree::build(&v, &alpha).unwrap();
    for tree in [&dense as &dyn QuadraticSampler, &blocked] {
        let mut counts = vec![0u64; 16];
        for _ in 0..100_000 {
            counts[tree.sample(&a, &mut rng).unwrap()] += 1;
        }
        let (stat, dof) = chi_squared(&counts, &want);
        let p_value = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
        assert!(p_value > 1e-3, "chi2={stat} dof={dof}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn leaf_probabilities_are_exact(n in 1usize..64, k in 1usize..8, rank in 1usize..8, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let v = random_vectors(n, k, &mut rng);
        let alpha: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.05, 2.0)).collect();
        let a = random_psd(k, rank.min(k), &mut rng);
        let want = brute_force_distribution(&v, &alpha, &a);
        let dense = QuadraticFormTree::build(&v, &alpha).unwrap();
        let blocked = BlockedQuadraticFormTree::build(&v, &alpha).unwrap();
        let pd = probabilities(&dense, &a);
        let pb = probabilities(&blocked, &a);
        for i in 0..n {
            prop_assert!((pd[i] - want[i]).abs() <= 1e-12);
            prop_assert!((pb[i] - want[i]).abs() <= 1e-12);
        }
        prop_assert!((pd.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}
