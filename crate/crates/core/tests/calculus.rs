mod common;

use proptest::prelude::*;
use specgap::calculus::*;
use specgap::linalg::eigendecompose;
use specgap::schrodinger::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_solves_its_ode(t in 0.01f64..1.0, lambda in -50.0f64..50.0) {
        // ∂_t² s = λ s via central differences of ∂_t s
        let h = 1e-4;
        let d2 = (s_dt(t + h, lambda) - s_dt(t - h, lambda)) / (2.0 * h);
        let s = s_eval(t, lambda);
        prop_assert!((d2 - lambda * s).abs() <= 1e-5 * (1.0 + (lambda * s).abs()));
    }

    #[test]
    fn profile_is_odd_with_unit_slope(t in 0.0f64..2.0, lambda in -30.0f64..30.0) {
        prop_assert!((s_eval(-t, lambda) + s_eval(t, lambda)).abs() <= 1e-14 * (1.0 + s_eval(t, lambda).abs()));
        prop_assert_eq!(s_eval(0.0, lambda), 0.0);
        prop_assert!((s_dt(0.0, lambda) - 1.0).abs() <= 1e-15);
    }
}

fn problem() -> (Grid, PotentialField, specgap::linalg::SymmetricMatrix) {
    let dom = AdmissibleDomain::new(&[0.0], &[1.0], 1.0).unwrap();
    let grid = Grid::with_resolution(&dom, 32, Boundary::Dirichlet).unwrap();
    let v = PotentialField::cosine(&grid, 3.0, 1.0, 0.2).unwrap();
    let h = build_hamiltonian(&dom, &grid, &v).unwrap();
    (grid, v, h)
}

#[test]
fn single_mode_extension_converges_at_second_order() {
    let (_, _, h) = problem();
    let dec = eigendecompose(&h).unwrap();
    let psi = dec.eigenvector(0).to_vec();
    let w = (dec.eigenvalue(0) - 1.0, dec.eigenvalue(0) + 1.0);
    let coarse = extend(&psi, &dec, w, 0.5, 33).unwrap();
    let fine = extend(&psi, &dec, w, 0.5, 65).unwrap();
    let order = residual_order(&coarse, &fine, &h).unwrap();
    assert!(order >= 1.9, "{order}");
    assert!(fine.derivative_defect() < 1e-3);
}

#[test]
fn swapped_branch_does_not_converge() {
    let (_, _, h) = problem();
    let dec = eigendecompose(&h).unwrap();
    let psi = dec.eigenvector(1).to_vec();
    let w = (dec.eigenvalue(0), dec.eigenvalue(2));
    let c = extend_with_profile(&psi, &dec, w, 0.5, 33, Profile::SwappedBranch).unwrap();
    let f = extend_with_profile(&psi, &dec, w, 0.5, 65, Profile::SwappedBranch).unwrap();
    assert!(residual_order(&c, &f, &h).unwrap() < 0.5);
}

#[test]
fn out_of_window_vectors_are_rejected() {
    let (_, _, h) = problem();
    let dec = eigendecompose(&h).unwrap();
    let psi = dec.eigenvector(5).to_vec();
    assert!(extend(&psi, &dec, (dec.eigenvalue(0) - 1.0, dec.eigenvalue(2)), 0.5, 33).is_err());
}

#[test]
fn sandwich_holds_for_low_energy_combinations() {
    let (_, v, h) = problem();
    let dec = eigendecompose(&h).unwrap();
    let mut r = common::rng(4);
    for top in 0..5 {
        let mut psi = vec![0.0; dec.n()];
        for k in 0..=top {
            let c = specgap::synth::gaussian(&mut r);
            psi.iter_mut().zip(dec.eigenvector(k)).for_each(|(p, e)| *p += c * e);
        }
        let e = dec.eigenvalue(top);
        let ext = extend(&psi, &dec, (dec.eigenvalue(0) - 1.0, e), 0.3, 33).unwrap();
        let rep = sandwich_check(&ext, &h, &v, e, 0.3).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.lower <= rep.value && rep.value <= rep.upper * (1.0 + 1e-6));
    }
}
