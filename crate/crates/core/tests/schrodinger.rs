mod common;

use proptest::prelude::*;
use specgap::linalg::{eigenvalues, symmetric_norm};
use specgap::schrodinger::*;

fn line(len: f64, ppu: usize) -> (AdmissibleDomain, Grid) {
    let dom = AdmissibleDomain::new(&[0.0], &[len], 1.0).unwrap();
    let grid = Grid::with_resolution(&dom, ppu, Boundary::Dirichlet).unwrap();
    (dom, grid)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_potential_shifts_the_spectrum(c in -20.0f64..20.0, len in 1usize..5) {
        let (dom, grid) = line(len as f64, 16);
        let free = eigenvalues(&build_hamiltonian(&dom, &grid, &PotentialField::zero(&grid)).unwrap()).unwrap();
        let shifted = eigenvalues(&build_hamiltonian(&dom, &grid, &PotentialField::constant(&grid, c)).unwrap()).unwrap();
        let scale = free[free.len() - 1] + c.abs();
        for (f, s) in free.iter().zip(&shifted) {
            prop_assert!((s - f - c).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn potential_bounds_the_spectrum_from_below(seed in any::<u64>(), amp in 0.0f64..10.0) {
        let (dom, grid) = line(8.0, 16);
        let v = PotentialField::piecewise_random(&dom, &grid, amp, seed).unwrap();
        let ev = eigenvalues(&build_hamiltonian(&dom, &grid, &v).unwrap()).unwrap();
        prop_assert!(ev[0] >= v.stats().min - 1e-10);
        prop_assert!(v.stats().sup <= amp + 1e-12);
    }

    #[test]
    fn equidistributed_balls_stay_in_their_cells(seed in any::<u64>(), delta in 0.01f64..0.49) {
        let dom = AdmissibleDomain::new(&[0.0, 0.0], &[3.0, 2.0], 1.0).unwrap();
        let set = sample_equidistributed(&dom, delta, seed).unwrap();
        prop_assert_eq!(set.centers().len(), 6);
        for (z, c) in set.centers().iter().zip(set.cell_corners()) {
            for ax in 0..2 {
                prop_assert!(z[ax] - delta >= c[ax] - 1e-12 && z[ax] + delta <= c[ax] + 1.0 + 1e-12);
            }
        }
        let grid = Grid::with_resolution(&dom, 16, Boundary::Dirichlet).unwrap();
        let mask = set.mask(&grid);
        prop_assert!(mask.values().iter().all(|&m| (0.0..=1.0).contains(&m)));
    }
}

#[test]
fn free_dirichlet_matches_closed_form() {
    let (dom, grid) = line(3.0, 32);
    let ev = eigenvalues(&build_hamiltonian(&dom, &grid, &PotentialField::zero(&grid)).unwrap()).unwrap();
    let h = grid.h();
    for (k, l) in ev.iter().enumerate() {
        let exact = 4.0 / (h * h) * ((k + 1) as f64 * std::f64::consts::PI * h / 6.0).sin().powi(2);
        assert!((l - exact).abs() <= 1e-10 * exact, "{k}: {l} vs {exact}");
    }
    // the continuum limit for the lowest mode
    assert!((ev[0] - (std::f64::consts::PI / 3.0).powi(2)).abs() < 1e-3);
}

#[test]
fn neumann_ground_state_is_zero() {
    let dom = AdmissibleDomain::new(&[0.0], &[2.0], 1.0).unwrap();
    let grid = Grid::with_resolution(&dom, 16, Boundary::Neumann).unwrap();
    let ev = eigenvalues(&build_hamiltonian(&dom, &grid, &PotentialField::zero(&grid)).unwrap()).unwrap();
    assert!(ev[0].abs() < 1e-10, "{}", ev[0]);
}

#[test]
fn hamiltonian_is_symmetric_and_bounded() {
    let (dom, grid) = line(4.0, 16);
    let v = PotentialField::piecewise_random(&dom, &grid, 5.0, 3).unwrap();
    let h = build_hamiltonian(&dom, &grid, &v).unwrap();
    let norm = symmetric_norm(&h).unwrap();
    // ‖−Δ_h‖ < 4/h² and ‖V‖ ≤ 5
    assert!(norm <= 4.0 / (grid.h() * grid.h()) + 5.0);
}

#[test]
fn inadmissible_inputs_are_rejected() {
    assert!(AdmissibleDomain::new(&[0.0], &[0.5], 1.0).is_err());
    let dom = AdmissibleDomain::new(&[0.0], &[4.0], 1.0).unwrap();
    assert!(sample_equidistributed(&dom, 0.5, 1).is_err());
    assert!(EquidistributedSet::from_centers(&dom, 0.2, vec![vec![0.1], vec![1.5], vec![2.5], vec![3.5]]).is_err());
}

#[test]
fn csv_potential_roundtrip() {
    let (_, grid) = line(2.0, 4);
    let text: String = std::iter::once("i,value\n".to_string())
        .chain((0..grid.len()).map(|i| format!("{i},{}\n", i as f64 * 0.5)))
        .collect();
    let v = PotentialField::from_csv_reader(&grid, text.as_bytes()).unwrap();
    assert_eq!(v.values()[2], 1.0);
    let short = "0,1.0\n";
    assert!(PotentialField::from_csv_reader(&grid, short.as_bytes()).is_err());
}
