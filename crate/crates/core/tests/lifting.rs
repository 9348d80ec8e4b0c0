mod common;

use proptest::prelude::*;
use specgap::lifting::*;
use specgap::linalg::{eigendecompose, eigenvalues, SymmetricMatrix};
use specgap::schrodinger::*;
use specgap::synth::{gapped_matrix, psd_with_bounds, symmetric_with_norm};

fn stats(min: f64, max: f64) -> PotentialStats {
    PotentialStats { min, max, sup: min.abs().max(max.abs()) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn c_uc_is_a_fraction_decreasing_in_energy(e in 0.0f64..100.0, de in 0.1f64..50.0, delta in 0.05f64..0.45, amp in 0.0f64..5.0) {
        let s = stats(-amp, amp);
        let lo = c_uc(1, 1.0, delta, &s, e, 10.0).unwrap();
        let hi = c_uc(1, 1.0, delta, &s, e + de, 10.0).unwrap();
        prop_assert!(lo.value > 0.0 && lo.value <= 1.0);
        prop_assert!(hi.value <= lo.value * (1.0 + 1e-12));
    }

    #[test]
    fn c_uc_increases_with_delta(e in 0.0f64..50.0, d1 in 0.05f64..0.2, d2 in 0.2f64..0.45) {
        let s = stats(0.0, 1.0);
        prop_assert!(c_uc(2, 1.0, d1, &s, e, 10.0).unwrap().value <= c_uc(2, 1.0, d2, &s, e, 10.0).unwrap().value);
    }

    #[test]
    fn kappa_is_linear_in_theta(theta in 0.01f64..3.0, s in 0.0f64..40.0) {
        let st = stats(0.0, 2.0);
        let k1 = kappa(1, 1.0, 0.2, theta, &st, 3.0, s, 10.0).unwrap();
        let k2 = kappa(1, 1.0, 0.2, 2.0 * theta, &st, 3.0, s, 10.0).unwrap();
        prop_assert!((k2 - 2.0 * k1).abs() <= 1e-12 * k2);
    }

    #[test]
    fn bottom_lifting_with_the_form_bound(seed in any::<u64>(), floor in 0.01f64..1.0) {
        let mut r = common::rng(seed);
        let h = gapped_matrix(30, (-1.0, 1.0), 3.0, &mut r);
        let w = psd_with_bounds(30, floor, floor + 1.0, &mut r);
        let cert = verify_bottom_lifting(&h, &w, 1.0, floor).unwrap();
        prop_assert!(cert.pass, "{:?}", cert.status);
        prop_assert!(cert.shifts.iter().all(|s| s.shift >= floor - 1e-9));
    }

    #[test]
    fn davis_kahan_bound_holds(seed in any::<u64>(), frac in 0.01f64..0.49) {
        let mut r = common::rng(seed);
        let a = gapped_matrix(24, (-1.0, 1.0), 2.0, &mut r);
        let b = symmetric_with_norm(24, frac, &mut r);
        let rep = davis_kahan_check(&a, &b, 0.0).unwrap();
        prop_assert!(rep.pass && rep.measured <= rep.bound);
    }

    #[test]
    fn monotone_in_a_psd_direction(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let h = symmetric_with_norm(16, 2.0, &mut r);
        let w = psd_with_bounds(16, 0.0, 1.0, &mut r);
        let ts: Vec<f64> = (0..6).map(|i| i as f64 * 0.3).collect();
        prop_assert!(verify_monotone(&h, &w, &ts).unwrap().pass);
    }
}

#[test]
fn davis_kahan_worked_example() {
    let a = SymmetricMatrix::diagonal(&[-1.0, 1.0]);
    let b = SymmetricMatrix::tridiagonal(&[0.0, 0.0], &[0.25]).unwrap();
    let rep = davis_kahan_check(&a, &b, 0.0).unwrap();
    assert_eq!(format!("{:.4} {:.4}", rep.measured, rep.bound), "0.1222 0.2588");
}

#[test]
fn overstated_kappa_fails_as_precondition() {
    let mut r = common::rng(11);
    let h = gapped_matrix(20, (-1.0, 1.0), 3.0, &mut r);
    let w = psd_with_bounds(20, 0.2, 1.0, &mut r);
    let cert = verify_bottom_lifting(&h, &w, 1.0, 10.0).unwrap();
    assert_eq!(cert.status, Status::PreconditionFailed);
    assert!(!cert.pass && cert.precondition_failed());
    let json = cert.to_json().unwrap();
    assert!(json.contains("precondition_failed"));
}

#[test]
fn left_gap_variants_pass_on_admissible_inputs() {
    let mut r = common::rng(5);
    let a = gapped_matrix(24, (-1.0, 1.0), 3.0, &mut r);
    let b = psd_with_bounds(24, 0.05, 0.4, &mut r);
    for v in [LeftVariant::Norm, LeftVariant::NonNegative, LeftVariant::Opt] {
        let c = verify_gap_lifting_left(&a, &b, 0.0, 0.05, v).unwrap();
        assert!(c.pass, "{v:?}: {:?}", c.preconditions);
    }
    let c = verify_gap_lifting_right(&a, &b, 0.0, 0.05, 5.0, RightVariant::NonNegative).unwrap();
    assert!(c.pass);
    // a perturbation larger than the gap breaks the hypothesis, not the conclusion
    let big = psd_with_bounds(24, 0.5, 3.0, &mut r);
    let c = verify_gap_lifting_left(&a, &big, 0.0, 0.5, LeftVariant::Norm).unwrap();
    assert_eq!(c.status, Status::PreconditionFailed);
}

#[test]
fn interval_moves_by_at_most_the_norm() {
    let a = SymmetricMatrix::diagonal(&[-2.0, -1.0, 1.0, 2.0]);
    let b = SymmetricMatrix::diagonal(&[0.5, 0.2, 0.1, 0.0]);
    let rep = interval_movement_check(&a, &b, -1.0, 1.0).unwrap();
    assert!(rep.pass && rep.offending.is_empty());
    let neg = SymmetricMatrix::diagonal(&[-0.1, 0.0, 0.0, 0.0]);
    assert!(interval_movement_check(&a, &neg, -1.0, 1.0).is_err());
}

#[test]
fn schroedinger_lifting_by_an_indicator() {
    let dom = AdmissibleDomain::new(&[0.0], &[4.0], 1.0).unwrap();
    let grid = Grid::with_resolution(&dom, 32, Boundary::Dirichlet).unwrap();
    let v = PotentialField::zero(&grid);
    let h = build_hamiltonian(&dom, &grid, &v).unwrap();
    let set = sample_equidistributed(&dom, 0.2, 9).unwrap();
    let w = set.mask(&grid).as_operator(1.0);
    let energy = 20.0;
    let k = kappa(1, 1.0, 0.2, 1.0, &v.stats(), 1.0, energy, 10.0).unwrap();
    let cert = verify_bottom_lifting(&h, &w, energy, k).unwrap();
    assert!(cert.pass, "{:?}", cert.preconditions);
    let before = eigenvalues(&h).unwrap();
    let after = eigendecompose(&h.add(&w).unwrap()).unwrap();
    for (i, &l) in after.eigenvalues().iter().enumerate().filter(|(_, &l)| l < energy) {
        assert!(l >= before[i] + k, "{i}");
    }
}
