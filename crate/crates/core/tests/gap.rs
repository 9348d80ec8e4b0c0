mod common;

use proptest::prelude::*;
use specgap::gap::*;
use specgap::linalg::{eigendecompose, spectral_projector, Interval};
use specgap::synth::{gapped_matrix, symmetric_with_norm};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn enumeration_is_ordered_away_from_gamma(seed in any::<u64>(), n in 4usize..40) {
        let mut r = common::rng(seed);
        let a = gapped_matrix(n, (-0.7, 0.9), 3.0, &mut r);
        let g = gap_spectrum_of(&a, 0.0).unwrap();
        prop_assert!(g.left.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(g.right.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(g.left.len() + g.right.len(), n);
        prop_assert!((g.dist() - 0.7f64.min(0.9)).abs() < 1e-12 || g.left.is_empty() || g.right.is_empty());
    }

    #[test]
    fn minimax_equals_reference(seed in any::<u64>(), n in 1usize..4, frac in 0.05f64..0.45) {
        let mut r = common::rng(seed);
        let a = gapped_matrix(30, (-1.0, 1.0), 3.0, &mut r);
        let b = symmetric_with_norm(30, frac, &mut r);
        let rep = gls_minimax(&a, &b, 0.0, n, 8, &mut r);
        prop_assume!(rep.is_ok());
        let rep = rep.unwrap();
        prop_assume!(rep.hypotheses.iter().all(|h| h.pass));
        prop_assert!(rep.pass, "{:?}", rep);
        prop_assert!(rep.gap <= rep.tolerance);
        prop_assert!(rep.probes.lower.iter().all(|&l| l >= rep.reference - rep.tolerance));
    }

    #[test]
    fn automorphism_identities(seed in any::<u64>(), frac in 0.05f64..0.45) {
        let mut r = common::rng(seed);
        let a = gapped_matrix(25, (-1.0, 1.0), 3.0, &mut r);
        let b = symmetric_with_norm(25, frac, &mut r);
        let rep = automorphism_check(&a, &b, 0.0).unwrap();
        prop_assert!(rep.sylvester_residual <= SYLVESTER_TOL);
        prop_assert!(rep.s_norm < 1.0 && rep.t_invertible && rep.neumann_ok);
    }
}

#[test]
fn spectral_subspace_below_gamma_is_maximal_nonpositive() {
    let mut r = common::rng(2);
    let a = gapped_matrix(20, (-1.0, 0.5), 2.0, &mut r);
    let dec = eigendecompose(&a).unwrap();
    let p = spectral_projector(&dec, Interval::at_most(0.0));
    let w = is_maximal_nonpositive(&p, &a, 0.0).unwrap();
    assert!(w.maximal_nonpositive, "{w:?}");
    assert!(w.max_on_subspace <= 0.0 && w.min_on_complement > 0.0);
    // the value on the spectral subspace is the k-th eigenvalue to the left
    let g = gap_spectrum_of(&a, 0.0).unwrap();
    for k in 1..=p.rank() {
        let v = langer_strauss_value(&a, 0.0, &p, k).unwrap();
        assert!((v - g.left_k(k).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn gamma_on_spectrum_is_reported() {
    let a = specgap::linalg::SymmetricMatrix::diagonal(&[-1.0, 0.0, 1.0]);
    assert!(matches!(gap_spectrum_of(&a, 0.0), Err(specgap::Error::GammaOnSpectrum { .. })));
}
