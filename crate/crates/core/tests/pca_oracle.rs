mod common;

use adaptnav_core::map::{estimate_intrinsic_dimensionality, fit_pca, Pca};
use common::{covariance, euclid, jacobi_eigen, random_matrix};
use proptest::prelude::*;

#[test]
fn leading_variance_matches_brute_force_covariance() {
    let rows = random_matrix(10, 5, 1);
    let (oracle, _) = jacobi_eigen(&covariance(&rows));
    let p = fit_pca(&rows, 3).unwrap();
    assert!((p.explained_variance()[0] - oracle[0]).abs() < 1e-6);
}

#[test]
fn all_variances_match_oracle_tall_fixture() {
    let rows = random_matrix(50, 30, 2);
    let (oracle, _) = jacobi_eigen(&covariance(&rows));
    let p = fit_pca(&rows, 30).unwrap();
    for (got, want) in p.explained_variance().iter().zip(&oracle) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert!(p.orthonormality_error() < 1e-8);
}

#[test]
fn wide_fixture_matches_covariance_oracle() {
    // more features than samples: the implementation decomposes the Gram
    // matrix, the oracle the full covariance
    let rows = random_matrix(15, 40, 3);
    let (oracle, vectors) = jacobi_eigen(&covariance(&rows));
    let p = fit_pca(&rows, 14).unwrap();
    for (i, (got, want)) in p.explained_variance().iter().zip(&oracle).enumerate() {
        assert!((got - want).abs() < 1e-6, "component {i}: {got} vs {want}");
        // same axis up to sign
        let cos: f64 = p.basis()[i].iter().zip(&vectors[i]).map(|(a, b)| a * b).sum();
        assert!((cos.abs() - 1.0).abs() < 1e-6, "component {i} cos {cos}");
    }
    assert!(p.orthonormality_error() < 1e-8);
}

#[test]
fn projection_matches_dense_matmul() {
    let rows = random_matrix(20, 8, 4);
    let p = fit_pca(&rows, 4).unwrap();
    for r in &rows {
        let got = p.project(r).unwrap();
        for (k, axis) in p.basis().iter().enumerate() {
            let mut want = 0.0;
            for j in 0..r.len() {
                want += axis[j] * (r[j] - p.mean()[j]);
            }
            assert!((got[k] - want).abs() < 1e-9);
        }
    }
}

#[test]
fn projection_is_a_contraction() {
    let rows = random_matrix(25, 6, 5);
    let p = fit_pca(&rows, 3).unwrap();
    let coords: Vec<Vec<f64>> = rows.iter().map(|r| p.project(r).unwrap()).collect();
    for i in 0..rows.len() {
        for j in 0..rows.len() {
            assert!(euclid(&coords[i], &coords[j]) <= euclid(&rows[i], &rows[j]) + 1e-9);
        }
    }
}

#[test]
fn rank_k_data_reconstructs_exactly() {
    // rows are combinations of two fixed directions plus an offset
    let dirs = random_matrix(2, 7, 6);
    let weights = random_matrix(12, 2, 7);
    let rows: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| (0..7).map(|j| 1.5 + w[0] * dirs[0][j] + w[1] * dirs[1][j]).collect())
        .collect();
    let p = fit_pca(&rows, 2).unwrap();
    for r in &rows {
        let back = p.reconstruct(&p.project(r).unwrap());
        assert!(euclid(&back, r) < 1e-8);
    }
    let pca = Pca::fit(&rows).unwrap();
    assert!(pca.spectrum()[2..].iter().all(|&l| l == 0.0));
    assert_eq!(pca.intrinsic_dimensionality(0.999).unwrap(), 2);
}

#[test]
fn intrinsic_dimensionality_matches_spectrum_scan() {
    let rows = random_matrix(30, 12, 8);
    let (oracle, _) = jacobi_eigen(&covariance(&rows));
    let total: f64 = oracle.iter().sum();
    for tau in [0.5, 0.8, 0.9, 0.99] {
        let mut cum = 0.0;
        let mut want = oracle.len();
        for (i, l) in oracle.iter().enumerate() {
            cum += l;
            if cum / total >= tau {
                want = i + 1;
                break;
            }
        }
        assert_eq!(estimate_intrinsic_dimensionality(&rows, tau).unwrap(), want, "tau {tau}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn basis_is_orthonormal_and_variance_sorted(
        n in 3usize..12, d in 2usize..10, seed in 0u64..1000
    ) {
        let rows = random_matrix(n, d, seed);
        let pca = Pca::fit(&rows).unwrap();
        let p = pca.projection(pca.max_dim()).unwrap();
        prop_assert!(p.orthonormality_error() < 1e-8);
        prop_assert!(p.explained_variance().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(p.explained_variance().iter().all(|&v| v >= 0.0));
    }
}
