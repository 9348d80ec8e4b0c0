mod common;

use common::{dense_symmetric, rng, tridiagonal};
use proptest::prelude::*;
use specgap::linalg::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_is_sound(seed in any::<u64>(), n in 1usize..60, tri in any::<bool>()) {
        let mut r = rng(seed);
        let a = if tri && n > 1 { tridiagonal(n, &mut r) } else { dense_symmetric(n, &mut r) };
        let dec = eigendecompose(&a).unwrap();
        let norm = dec.norm().max(1.0);
        prop_assert!(dec.max_residual(&a) <= 1e-11 * norm);
        prop_assert!(dec.orthogonality_defect() <= 1e-11);
        prop_assert!(dec.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = (0..n).map(|i| a.get(i, i)).sum();
        let sum: f64 = dec.eigenvalues().iter().sum();
        prop_assert!((trace - sum).abs() <= 1e-10 * norm * n as f64);
    }

    #[test]
    fn values_only_path_agrees(seed in any::<u64>(), n in 2usize..50) {
        let mut r = rng(seed);
        let a = tridiagonal(n, &mut r);
        let full = eigendecompose(&a).unwrap();
        let vals = eigenvalues(&a).unwrap();
        for (x, y) in vals.iter().zip(full.eigenvalues()) {
            prop_assert!((x - y).abs() <= 1e-12 * full.norm().max(1.0));
        }
    }

    #[test]
    fn projectors_are_orthogonal_and_complementary(seed in any::<u64>(), n in 2usize..40, cut in -1.0f64..1.0) {
        let mut r = rng(seed);
        let a = dense_symmetric(n, &mut r);
        let dec = eigendecompose(&a).unwrap();
        let p = spectral_projector(&dec, Interval::at_most(cut));
        let q = spectral_projector(&dec, Interval::above(cut));
        prop_assert_eq!(p.rank() + q.rank(), n);
        let (idem, sym) = p.idempotency_defect();
        prop_assert!(idem <= 1e-12 && sym <= 1e-12);
        let sum = p.materialize() + q.materialize();
        let id = nalgebra::DMatrix::<f64>::identity(n, n);
        prop_assert!((sum - id).abs().max() <= 1e-12);
    }

    #[test]
    fn compression_bounds_are_rayleigh_quotients(seed in any::<u64>(), n in 3usize..30) {
        let mut r = rng(seed);
        let a = dense_symmetric(n, &mut r);
        let b = dense_symmetric(n, &mut r);
        let dec = eigendecompose(&a).unwrap();
        let p = spectral_projector(&dec, Interval::at_most(0.0));
        let lo = compression_min(&b, p.basis()).unwrap();
        let hi = compression_max(&b, p.basis()).unwrap();
        for k in 0..p.rank() {
            let v: Vec<f64> = p.basis().column(k).iter().copied().collect();
            let q = b.quadratic_form(&v);
            prop_assert!(q >= lo - 1e-12 * b.max_abs() * n as f64 && q <= hi + 1e-12 * b.max_abs() * n as f64);
        }
    }

    #[test]
    fn banded_counts_match_dense(seed in any::<u64>(), n in 4usize..40, sigma in -3.0f64..3.0) {
        let mut r = rng(seed);
        let a = tridiagonal(n, &mut r);
        let mut band = HermitianBand::zeros(n, 1);
        for i in 0..n {
            band.set(i, i, a.get(i, i).into());
            if i > 0 {
                band.set(i, i - 1, a.get(i, i - 1).into());
            }
        }
        let ev = eigenvalues(&a).unwrap();
        let below = ev.iter().filter(|&&l| l < sigma).count();
        let near = ev.iter().any(|l| (l - sigma).abs() < 1e-9);
        prop_assume!(!near);
        prop_assert_eq!(band.count_below(sigma), below);
    }
}

#[test]
fn operator_norm_of_projector_difference() {
    let mut r = rng(9);
    let a = dense_symmetric(12, &mut r);
    let dec = eigendecompose(&a).unwrap();
    let p = spectral_projector(&dec, Interval::at_most(0.0));
    assert_eq!(principal_angle_norm(&p, &p).unwrap(), 0.0);
    let q = p.complement();
    if p.rank() > 0 && q.rank() > 0 {
        assert!((principal_angle_norm(&p, &q).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn empty_and_one_by_one() {
    let e = eigendecompose(&SymmetricMatrix::zeros(0, 0)).unwrap();
    assert_eq!(e.n(), 0);
    let one = eigendecompose(&SymmetricMatrix::diagonal(&[-2.5])).unwrap();
    assert_eq!(one.eigenvalues(), &[-2.5]);
}
