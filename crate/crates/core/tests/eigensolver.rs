//! The Householder + implicit QL eigensolver against nalgebra, plus algebraic
//! invariants on random symmetric matrices.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssf_lab::{eigen_decompose, SymmetricOperator};

fn random_symmetric(n: usize, seed: u64) -> SymmetricOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = SymmetricOperator::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            a.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    a
}

fn reference_eigenvalues(a: &SymmetricOperator) -> Vec<f64> {
    let n = a.dim();
    let m = DMatrix::from_row_slice(n, n, &a.to_dense(true));
    let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn matches_nalgebra_on_random_matrices() {
    for (n, seed) in [(1, 1), (2, 2), (7, 3), (40, 4), (120, 5)] {
        let a = random_symmetric(n, seed);
        let ours = eigen_decompose(&a, false).unwrap();
        let theirs = reference_eigenvalues(&a);
        let scale = theirs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (x, y) in ours.values().iter().zip(&theirs) {
            assert!((x - y).abs() <= 1e-12 * n as f64 * scale, "n={n}: {x} vs {y}");
        }
    }
}

#[test]
fn matches_nalgebra_on_degenerate_lattice() {
    let g = ssf_lab::BoxGeometry::new(3, 4).unwrap();
    let h = ssf_lab::build_free_hamiltonian(&g, &ssf_lab::model::BackgroundPotential::zero()).unwrap();
    let ours = eigen_decompose(&h, true).unwrap();
    let theirs = reference_eigenvalues(&h);
    for (x, y) in ours.values().iter().zip(&theirs) {
        assert!((x - y).abs() < 1e-11);
    }
    assert!(ours.max_residual(&h).unwrap() < 1e-11);
    assert!(ours.orthonormality_defect().unwrap() < 1e-11);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_invariants(n in 1usize..48, seed in any::<u64>()) {
        let a = random_symmetric(n, seed);
        let spec = eigen_decompose(&a, true).unwrap();
        let v = spec.values();
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        let scale = 1.0 + a.max_abs() * n as f64;
        prop_assert!((v.iter().sum::<f64>() - a.trace()).abs() <= 1e-12 * scale * n as f64);
        let frob: f64 = v.iter().map(|x| x * x).sum();
        prop_assert!((frob - a.frobenius_norm_sq()).abs() <= 1e-11 * scale * scale);
        prop_assert!(spec.max_residual(&a).unwrap() <= 1e-12 * scale);
        prop_assert!(spec.orthonormality_defect().unwrap() <= 1e-12 * n as f64);
        let no_vectors = eigen_decompose(&a, false).unwrap();
        for (x, y) in no_vectors.values().iter().zip(v) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn permutation_similarity_preserves_spectrum(n in 2usize..30, seed in any::<u64>()) {
        let a = random_symmetric(n, seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(seed as usize % n);
        let b = a.permuted(&perm).unwrap();
        let (sa, sb) = (eigen_decompose(&a, false).unwrap(), eigen_decompose(&b, false).unwrap());
        for (x, y) in sa.values().iter().zip(sb.values()) {
            prop_assert!((x - y).abs() <= 1e-11 * (1.0 + x.abs()) * n as f64);
        }
    }
}
