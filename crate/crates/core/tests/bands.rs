use proptest::prelude::*;
use specgap::bands::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn constant_shift_moves_every_band(c in -5.0f64..5.0) {
        let z = compute_bands(&CellPotential::constant(1.0, 128, 0.0).unwrap(), 16, 3).unwrap();
        let s = compute_bands(&CellPotential::constant(1.0, 128, c).unwrap(), 16, 3).unwrap();
        for (a, b) in z.intervals.iter().zip(&s.intervals) {
            prop_assert!((b.0 - a.0 - c).abs() < 1e-9 && (b.1 - a.1 - c).abs() < 1e-9);
        }
    }

    #[test]
    fn fibers_are_symmetric_in_theta(theta in 0.0f64..PI, amp in 0.0f64..3.0) {
        let v = CellPotential::cosine(1.0, 64, amp).unwrap();
        let a = bloch_fiber(&v, theta, 3).unwrap();
        let b = bloch_fiber(&v, 2.0 * PI - theta, 3).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn bands_are_ordered(amp in 0.0f64..4.0) {
        let bf = compute_bands(&CellPotential::cosine(1.0, 128, amp).unwrap(), 32, 4).unwrap();
        for e in &bf.energies {
            prop_assert!(e.iter().all(|x| x.is_finite()));
        }
        for w in bf.intervals.windows(2) {
            prop_assert!(w[0].0 <= w[0].1 && w[0].0 <= w[1].0 && w[0].1 <= w[1].1 + BAND_ATOL);
        }
        for &(n, lo, hi) in &bf.gaps {
            prop_assert!(lo < hi && bf.intervals[n - 1].1 == lo);
        }
    }
}

#[test]
fn free_bands_follow_the_stencil_dispersion() {
    let n = 256;
    let v = CellPotential::constant(1.0, n, 0.0).unwrap();
    let bf = compute_bands(&v, 32, 3).unwrap();
    let h = 1.0 / n as f64;
    // discrete free edges at θ=0 and θ=π: k = 0, π, 2π, 3π
    let disc = |k: f64| 4.0 / (h * h) * (k * h / 2.0).sin().powi(2);
    assert!(bf.intervals[0].0.abs() < 1e-9);
    for (i, &(lo, hi)) in bf.intervals.iter().enumerate() {
        let (el, eh) = (disc(i as f64 * PI), disc((i + 1) as f64 * PI));
        // the fourth-order stencil sits within h² of the second-order one
        assert!((lo - el).abs() < 1e-2 * (1.0 + el) && (hi - eh).abs() < 1e-2 * eh, "{i}: {lo} {hi}");
        assert!((hi - ((i + 1) as f64 * PI).powi(2)).abs() < 1e-3 * hi);
    }
    assert!(bf.gaps.is_empty(), "{:?}", bf.gaps);
}

#[test]
fn mathieu_edges_match_the_discriminant() {
    let v = CellPotential::cosine(1.0, 1024, 2.0).unwrap();
    let bf = compute_bands(&v, 16, 3).unwrap();
    assert!(!bf.gaps.is_empty());
    for c in cross_check_edges(&v, &bf).unwrap() {
        assert!(c.difference.abs() < 1e-6, "{c:?}");
    }
    // bottom of the spectrum: D(E₁(0)) = 2
    assert!((discriminant(&v, bf.intervals[0].0).unwrap() - 2.0).abs() < 1e-5);
}

#[test]
fn small_grids_are_refused() {
    let v = CellPotential::constant(1.0, 64, 0.0).unwrap();
    assert!(compute_bands(&v, 15, 2).is_err());
    assert!(compute_bands(&v, 16, 0).is_err());
    assert!(CellPotential::ball_indicator(1.0, 64, 0.5, 0.6, 1.0).is_err());
}

#[test]
fn edges_lift_under_a_nonnegative_indicator() {
    let v = CellPotential::cosine(1.0, 256, 2.0).unwrap();
    let w = CellPotential::ball_indicator(1.0, 256, 0.5, 0.2, 1.0).unwrap();
    let ts: Vec<f64> = (0..6).map(|i| i as f64 * 0.05).collect();
    let tr = trace_edges(&v, &w, &ts, 0.0, TraceSettings { theta_count: 16, gap_band: 1, indefinite: false }).unwrap();
    assert!(tr.monotone_min_increment >= -1e-9);
    assert!(tr.steps.windows(2).all(|s| s[1].f_minus >= s[0].f_minus - 1e-9));
    assert!(tr.to_svg().starts_with("<svg"));
}
