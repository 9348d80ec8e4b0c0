//! Seeded generators of synthetic test operators: random orthogonal bases,
//! matrices with a prescribed spectral gap, and perturbations of exact norm.

use nalgebra::DMatrix;
use rand::Rng;

use crate::linalg::{eigendecompose, OrthogonalProjector, SymmetricMatrix};

/// Haar-like orthogonal matrix from Gram–Schmidt on a Gaussian-ish sample.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let q = OrthogonalProjector::from_span(&g);
    if q.rank() == n {
        q.basis().clone()
    } else {
        DMatrix::identity(n, n)
    }
}

/// Standard normal variate (Box–Muller).
pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `V diag(λ) Vᵀ` with a random orthogonal `V`.
pub fn with_spectrum(values: &[f64], rng: &mut impl Rng) -> SymmetricMatrix {
    let n = values.len();
    let v = random_orthogonal(n, rng);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values));
    let m = &v * d * v.transpose();
    SymmetricMatrix::from_fn(n, n.saturating_sub(1), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Eigenvalues spread over `[lo_min, gap_lo] ∪ [gap_hi, hi_max]` with both
/// gap edges attained, `below` of them on the left.
pub fn gapped_spectrum(n: usize, below: usize, gap: (f64, f64), spread: f64, rng: &mut impl Rng) -> Vec<f64> {
    let (a, b) = gap;
    let mut v = Vec::with_capacity(n);
    for k in 0..n {
        if k < below {
            v.push(if k == 0 { a } else { a - rng.gen::<f64>() * spread });
        } else if k == below {
            v.push(b);
        } else {
            v.push(b + rng.gen::<f64>() * spread);
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

/// Random symmetric matrix with a spectral gap exactly `(gap.0, gap.1)`.
pub fn gapped_matrix(n: usize, gap: (f64, f64), spread: f64, rng: &mut impl Rng) -> SymmetricMatrix {
    let below = rng.gen_range(1..n);
    let values = gapped_spectrum(n, below, gap, spread, rng);
    with_spectrum(&values, rng)
}

/// Random symmetric matrix of operator norm exactly `norm`.
pub fn symmetric_with_norm(n: usize, norm: f64, rng: &mut impl Rng) -> SymmetricMatrix {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let top = rng.gen_range(0..n);
    v[top] = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    with_spectrum(&v.iter().map(|x| x * norm).collect::<Vec<_>>(), rng)
}

/// Random positive semidefinite matrix with eigenvalues in `[floor, norm]`,
/// both attained.
pub fn psd_with_bounds(n: usize, floor: f64, norm: f64, rng: &mut impl Rng) -> SymmetricMatrix {
    let mut v: Vec<f64> = (0..n).map(|_| floor + rng.gen::<f64>() * (norm - floor)).collect();
    if n > 0 {
        v[0] = norm;
    }
    if n > 1 {
        v[1] = floor;
    }
    with_spectrum(&v, rng)
}

/// Symmetric matrix whose positive and negative parts are controlled: the
/// result `C` satisfies `0 ≤ C ≤ B` for PSD `B`.
pub fn dominated_by(b: &SymmetricMatrix, rng: &mut impl Rng) -> SymmetricMatrix {
    // C = B^{1/2} R B^{1/2} with 0 ≤ R ≤ I
    let dec = eigendecompose(b).expect("finite input");
    let n = b.n();
    let root = {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            dec.eigenvalues().iter().map(|l| l.max(0.0).sqrt()),
        ));
        dec.eigenvectors() * d * dec.eigenvectors().transpose()
    };
    let r_vals: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let r = with_spectrum(&r_vals, rng).to_dense();
    let c = &root * r * &root;
    SymmetricMatrix::from_fn(n, n.saturating_sub(1), |i, j| 0.5 * (c[(i, j)] + c[(j, i)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, operator_norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prescribed_spectrum_is_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = gapped_matrix(30, (-1.0, 1.0), 3.0, &mut rng);
        let ev = eigenvalues(&a).unwrap();
        assert!(ev.iter().all(|&l| l <= -1.0 + 1e-12 || l >= 1.0 - 1e-12));
        assert!(ev.iter().any(|&l| (l + 1.0).abs() < 1e-12));
        assert!(ev.iter().any(|&l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn exact_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = symmetric_with_norm(20, 0.37, &mut rng);
        assert!((operator_norm(&b.to_dense()).unwrap() - 0.37).abs() < 1e-12);
        let p = psd_with_bounds(20, 0.1, 0.5, &mut rng);
        let ev = eigenvalues(&p).unwrap();
        assert!((ev[0] - 0.1).abs() < 1e-12 && (ev[19] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dominated_matrix_is_sandwiched() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = psd_with_bounds(15, 0.0, 1.0, &mut rng);
        let c = dominated_by(&b, &mut rng);
        assert!(eigenvalues(&c).unwrap()[0] >= -1e-12);
        assert!(eigenvalues(&b.sub(&c).unwrap()).unwrap()[0] >= -1e-12);
    }
}
