use super::*;
use crate::geometry::BoxGeometry;
use crate::model::{build_free_hamiltonian, BackgroundPotential};
use crate::operator::SymmetricOperator;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn free_1d(l: usize, c: f64) -> SymmetricOperator {
    let g = BoxGeometry::new(1, l).unwrap();
    build_free_hamiltonian(&g, &BackgroundPotential::constant(c)).unwrap()
}

#[test]
fn diagonal_input_is_sorted() {
    let s = eigen_decompose(&SymmetricOperator::from_diagonal(&[3.0, 1.0, 2.0]), true).unwrap();
    assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
    assert_eq!(s.vector(0).unwrap(), &[0.0, 1.0, 0.0]);
}

#[test]
fn free_chain_circulant_spectra() {
    let s3 = eigen_decompose(&free_1d(3, 0.0), false).unwrap();
    assert!(close(s3.values(), &[0.0, 3.0, 3.0], 1e-12), "{:?}", s3.values());
    let s4 = eigen_decompose(&free_1d(4, 0.0), false).unwrap();
    assert!(close(s4.values(), &[0.0, 2.0, 2.0, 4.0], 1e-12), "{:?}", s4.values());
    let c = 0.75;
    let sc = eigen_decompose(&free_1d(3, c), false).unwrap();
    assert!(close(sc.values(), &[c, 3.0 + c, 3.0 + c], 1e-12));
}

#[test]
fn free_box_matches_analytic_band() {
    for (d, l) in [(1usize, 17usize), (2, 6), (3, 4)] {
        let g = BoxGeometry::new(d, l).unwrap();
        let h = build_free_hamiltonian(&g, &BackgroundPotential::zero()).unwrap();
        let got = eigen_decompose(&h, true).unwrap();
        let mut want: Vec<f64> = (0..g.site_count())
            .map(|s| {
                let c = g.coords(s);
                (0..d)
                    .map(|a| 2.0 * (1.0 - (2.0 * std::f64::consts::PI * c[a] as f64 / l as f64).cos()))
                    .sum()
            })
            .collect();
        want.sort_by(f64::total_cmp);
        assert!(close(got.values(), &want, 1e-10), "d={d} L={l}");
        assert!(got.max_residual(&h).unwrap() < 1e-10);
        assert!(got.orthonormality_defect().unwrap() < 1e-10);
    }
}

#[test]
fn trace_and_frobenius_preserved() {
    let g = BoxGeometry::new(1, 30).unwrap();
    let mut h = build_free_hamiltonian(&g, &BackgroundPotential::zero()).unwrap();
    let pot: Vec<f64> = (0..30).map(|i| ((i * 7919) % 13) as f64 / 13.0).collect();
    h.add_diagonal(&pot).unwrap();
    let s = eigen_decompose(&h, false).unwrap();
    let scale = 30.0 * h.max_abs();
    let tr: f64 = s.values().iter().sum();
    let fro: f64 = s.values().iter().map(|x| x * x).sum();
    assert!((tr - h.trace()).abs() <= 1e-9 * scale);
    assert!((fro - h.frobenius_norm_sq()).abs() <= 1e-9 * scale * h.max_abs());
}

#[test]
fn degenerate_and_tiny_matrices() {
    let empty = eigen_decompose(&SymmetricOperator::zeros(0), true).unwrap();
    assert!(empty.is_empty());
    let one = eigen_decompose(&SymmetricOperator::from_diagonal(&[-2.5]), true).unwrap();
    assert_eq!(one.values(), &[-2.5]);
    assert_eq!(one.vector(0).unwrap(), &[1.0]);
    let zero = eigen_decompose(&SymmetricOperator::zeros(5), true).unwrap();
    assert!(zero.values().iter().all(|&x| x == 0.0));
    assert!(zero.orthonormality_defect().unwrap() < 1e-15);
}

#[test]
fn non_finite_input_is_rejected() {
    let op = SymmetricOperator::from_diagonal(&[1.0, f64::NAN]);
    assert!(eigen_decompose(&op, false).is_err());
}

#[test]
fn counting_hand_counts() {
    let s = Spectrum::from_eigenvalues(vec![3.0, 0.0, 3.0]);
    assert_eq!(s.counting(1.0), 1);
    assert_eq!(s.counting(3.0), 3);
    assert_eq!(s.counting(-0.1), 0);
    assert_eq!(s.counting(f64::INFINITY), 3);
}

#[test]
fn count_in_half_open() {
    let s = Spectrum::from_eigenvalues(vec![0.0, 3.0, 3.0]);
    assert_eq!(s.count_in(&EnergyInterval::new(2.5, 3.5).unwrap()), 2);
    assert_eq!(s.count_in(&EnergyInterval::new(0.0, 4.0).unwrap()), 3);
    // eigenvalue sitting exactly on the right edge is excluded, on the left included
    assert_eq!(s.count_in(&EnergyInterval::new(-1.0, 3.0).unwrap()), 1);
    assert_eq!(s.count_in(&EnergyInterval::new(3.0, 3.5).unwrap()), 2);
    let (a, b, c) = (-0.5, 1.7, 3.2);
    let left = s.count_in(&EnergyInterval::new(a, b).unwrap());
    let right = s.count_in(&EnergyInterval::new(b, c).unwrap());
    assert_eq!(left + right, s.count_in(&EnergyInterval::new(a, c).unwrap()));
    assert!(EnergyInterval::new(1.0, 1.0).is_err());
    assert!(EnergyInterval::new(2.0, 1.0).is_err());
}

#[test]
fn weighted_projector_traces() {
    let g = BoxGeometry::new(1, 12).unwrap();
    let mut h = build_free_hamiltonian(&g, &BackgroundPotential::zero()).unwrap();
    h.add_diagonal(&(0..12).map(|i| (i as f64 * 0.37).sin().abs()).collect::<Vec<_>>())
        .unwrap();
    let s = eigen_decompose(&h, true).unwrap();
    let ones = vec![1.0; 12];
    for (a, b) in [(0.0, 1.0), (1.0, 2.5), (-1.0, 10.0)] {
        let win = EnergyInterval::new(a, b).unwrap();
        let wpt = s.weighted_projector_trace(&ones, &win).unwrap();
        assert!((wpt - s.count_in(&win) as f64).abs() <= 1e-10 * 12.0);
    }
    let mut delta = vec![0.0; 12];
    delta[5] = 1.0;
    let all = EnergyInterval::new(-100.0, 100.0).unwrap();
    assert!((s.weighted_projector_trace(&delta, &all).unwrap() - 1.0).abs() < 1e-12);
    let small = s
        .weighted_projector_trace(&delta, &EnergyInterval::new(1.0, 2.0).unwrap())
        .unwrap();
    let big = s
        .weighted_projector_trace(&delta, &EnergyInterval::new(0.5, 3.0).unwrap())
        .unwrap();
    assert!(small <= big);

    let bare = s.clone().into_eigenvalues();
    assert!(matches!(
        bare.weighted_projector_trace(&ones, &all),
        Err(crate::Error::MissingEigenvectors)
    ));
    assert!(s.weighted_projector_trace(&[-1.0; 12], &all).is_err());
}

#[test]
fn heat_traces() {
    let z = eigen_decompose(&SymmetricOperator::zeros(4), true).unwrap();
    assert!((z.weighted_heat_trace(&[1.0; 4], 2.0).unwrap() - 4.0).abs() < 1e-14);

    let s = eigen_decompose(&SymmetricOperator::from_diagonal(&[0.0, 1.0]), true).unwrap();
    let want = 1.0 + (-1.0f64).exp();
    assert!((s.weighted_heat_trace(&[1.0, 1.0], 1.0).unwrap() - want).abs() < 1e-15);
    assert!(s.weighted_heat_trace(&[1.0, 1.0], 0.0).is_err());

    let p = eigen_decompose(&free_1d(5, 0.5), true).unwrap();
    let w = [1.0; 5];
    let mut prev = f64::INFINITY;
    for t in [0.5, 1.0, 2.0, 5.0, 20.0, 80.0] {
        let v = p.weighted_heat_trace(&w, t).unwrap();
        assert!(v < prev);
        prev = v;
    }
    assert!(prev < 1e-15);
}

#[test]
fn adding_nonnegative_diagonal_never_lowers_eigenvalues() {
    let g = BoxGeometry::new(2, 5).unwrap();
    let h0 = build_free_hamiltonian(&g, &BackgroundPotential::zero()).unwrap();
    for k in 0..5 {
        let bump: Vec<f64> = (0..25).map(|i| (((i + 3 * k) * 31) % 7) as f64 / 7.0).collect();
        let mut h1 = h0.clone();
        h1.add_diagonal(&bump).unwrap();
        let a = eigen_decompose(&h0, false).unwrap();
        let b = eigen_decompose(&h1, false).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!(y - x >= -1e-12);
        }
    }
}

#[test]
fn multiplicity_diagnostic() {
    let s = Spectrum::from_eigenvalues(vec![0.0, 3.0, 3.0, 3.0 + 1e-12, 4.0]);
    assert_eq!(s.max_multiplicity(), 3);
}
