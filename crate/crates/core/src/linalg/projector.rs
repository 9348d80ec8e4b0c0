use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::eigen::{symmetric_norm, SpectralDecomposition};
use super::matrix::SymmetricMatrix;
use crate::error::{Error, Result};

/// Relative snap tolerance for eigenvalues sitting numerically on an interval
/// endpoint, in units of the operator norm.
pub const DEFAULT_SNAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    Open,
    Closed,
}

/// Real interval with independently open or closed ends; endpoints may be
/// infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_bound: Bound,
    pub hi_bound: Bound,
}

impl Interval {
    /// `(lo, hi]`, the default convention for spectral intervals.
    pub fn half_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_bound: Bound::Open, hi_bound: Bound::Closed }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_bound: Bound::Closed, hi_bound: Bound::Closed }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_bound: Bound::Open, hi_bound: Bound::Open }
    }

    /// `(−∞, e]`
    pub fn at_most(e: f64) -> Self {
        Self::half_open(f64::NEG_INFINITY, e)
    }

    /// `(e, ∞)`
    pub fn above(e: f64) -> Self {
        Self::open(e, f64::INFINITY)
    }

    /// Membership with endpoint snapping: a value within `snap` of an
    /// endpoint counts as lying on it.
    pub fn contains(&self, x: f64, snap: f64) -> bool {
        let lo_ok = if (x - self.lo).abs() <= snap {
            self.lo_bound == Bound::Closed
        } else {
            x > self.lo
        };
        let hi_ok = if (x - self.hi).abs() <= snap {
            self.hi_bound == Bound::Closed
        } else {
            x < self.hi
        };
        lo_ok && hi_ok
    }
}

/// Orthogonal projector represented by an orthonormal basis of its range.
#[derive(Clone, Debug)]
pub struct OrthogonalProjector {
    basis: DMatrix<f64>,
}

impl OrthogonalProjector {
    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Self { basis }
    }

    /// Orthonormalizes the columns of `vectors` (modified Gram–Schmidt, two
    /// passes). Columns that turn out linearly dependent are dropped.
    pub fn from_span(vectors: &DMatrix<f64>) -> Self {
        let n = vectors.nrows();
        let mut kept: Vec<Vec<f64>> = Vec::new();
        for j in 0..vectors.ncols() {
            let mut v: Vec<f64> = vectors.column(j).iter().copied().collect();
            let orig = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if orig == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for q in &kept {
                    let c: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
                }
            }
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv > 1e-10 * orig {
                v.iter_mut().for_each(|x| *x /= nv);
                kept.push(v);
            }
        }
        let mut basis = DMatrix::zeros(n, kept.len());
        for (j, q) in kept.iter().enumerate() {
            basis.column_mut(j).copy_from_slice(q);
        }
        Self { basis }
    }

    pub fn zero(n: usize) -> Self {
        Self { basis: DMatrix::zeros(n, 0) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `U Uᵀ`
    pub fn materialize(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let xv = nalgebra::DVector::from_column_slice(x);
        let y = &self.basis * (self.basis.transpose() * xv);
        y.iter().copied().collect()
    }

    /// Projector onto the orthogonal complement of the range.
    pub fn complement(&self) -> OrthogonalProjector {
        let n = self.ambient_dim();
        let r = self.rank();
        if r == 0 {
            return Self { basis: DMatrix::identity(n, n) };
        }
        // Project the standard basis and keep the n − r best-conditioned
        // directions; two Gram–Schmidt passes make them orthonormal.
        let p = self.materialize();
        let mut scored: Vec<(usize, f64)> = (0..n).map(|i| (i, 1.0 - p[(i, i)])).collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut kept: Vec<Vec<f64>> = (0..r).map(|j| self.basis.column(j).iter().copied().collect()).collect();
        let mut out: Vec<Vec<f64>> = Vec::new();
        for &(i, _) in &scored {
            if out.len() == n - r {
                break;
            }
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            for _ in 0..2 {
                for q in kept.iter() {
                    let c: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
                }
            }
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
                kept.push(v.clone());
                out.push(v);
            }
        }
        let mut basis = DMatrix::zeros(n, out.len());
        for (j, q) in out.iter().enumerate() {
            basis.column_mut(j).copy_from_slice(q);
        }
        Self { basis }
    }

    /// `‖P² − P‖_max` and `‖P − Pᵀ‖_max` of the materialized matrix.
    pub fn idempotency_defect(&self) -> (f64, f64) {
        let p = self.materialize();
        let p2 = &p * &p;
        let idem = (&p2 - &p).abs().max();
        let sym = (&p - p.transpose()).abs().max();
        (idem, sym)
    }
}

/// Spectral projector of the decomposed operator onto `interval`.
///
/// Membership is decided per eigenvalue, never per eigenvector, so degenerate
/// eigenvalues are handled consistently. Values within `snap · ‖A‖` of an
/// endpoint are treated as lying on it.
pub fn spectral_projector_with_snap(dec: &SpectralDecomposition, interval: Interval, snap: f64) -> OrthogonalProjector {
    let tol = snap * dec.norm().max(f64::MIN_POSITIVE);
    let cols: Vec<usize> = (0..dec.n()).filter(|&k| interval.contains(dec.eigenvalue(k), tol)).collect();
    let mut basis = DMatrix::zeros(dec.n(), cols.len());
    for (j, &k) in cols.iter().enumerate() {
        basis.column_mut(j).copy_from(&dec.eigenvectors().column(k));
    }
    OrthogonalProjector { basis }
}

pub fn spectral_projector(dec: &SpectralDecomposition, interval: Interval) -> OrthogonalProjector {
    spectral_projector_with_snap(dec, interval, DEFAULT_SNAP)
}

/// `‖P − Q‖`. For projectors of equal rank this is the sine of the largest
/// principal angle between the ranges.
pub fn principal_angle_norm(p: &OrthogonalProjector, q: &OrthogonalProjector) -> Result<f64> {
    if p.ambient_dim() != q.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: p.ambient_dim(), found: q.ambient_dim() });
    }
    let diff = p.materialize() - q.materialize();
    let d = SymmetricMatrix::from_dense_symmetrized(&diff)?;
    Ok(symmetric_norm(&d)?.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigendecompose;

    fn diag_dec(v: &[f64]) -> SpectralDecomposition {
        eigendecompose(&SymmetricMatrix::diagonal(v)).unwrap()
    }

    #[test]
    fn at_most_includes_endpoint() {
        let dec = diag_dec(&[0.0, 1.0, 2.0]);
        let p = spectral_projector(&dec, Interval::at_most(1.0));
        assert_eq!(p.rank(), 2);
        let m = p.materialize();
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(1, 1)], 1.0);
        assert_eq!(m[(2, 2)], 0.0);
    }

    #[test]
    fn half_open_excludes_left_endpoint() {
        let dec = diag_dec(&[0.0, 1.0, 2.0]);
        let p = spectral_projector(&dec, Interval::half_open(0.0, 2.0));
        assert_eq!(p.rank(), 2);
        let m = p.materialize();
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(1, 1)], 1.0);
        assert_eq!(m[(2, 2)], 1.0);
    }

    #[test]
    fn empty_interval_rank_zero() {
        let dec = diag_dec(&[0.0, 1.0, 2.0]);
        assert_eq!(spectral_projector(&dec, Interval::half_open(1.0, 1.0)).rank(), 0);
    }

    #[test]
    fn snap_applies_to_near_endpoint() {
        let dec = diag_dec(&[1e-16, 1.0]);
        assert_eq!(spectral_projector(&dec, Interval::half_open(0.0, 2.0)).rank(), 1);
        assert_eq!(spectral_projector_with_snap(&dec, Interval::half_open(0.0, 2.0), 0.0).rank(), 2);
    }

    #[test]
    fn principal_angle_trivial_cases() {
        let e1 = OrthogonalProjector::from_span(&DMatrix::from_column_slice(2, 1, &[1.0, 0.0]));
        let e2 = OrthogonalProjector::from_span(&DMatrix::from_column_slice(2, 1, &[0.0, 1.0]));
        assert_eq!(principal_angle_norm(&e1, &e1).unwrap(), 0.0);
        assert!((principal_angle_norm(&e1, &e2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn principal_angle_of_rotated_line() {
        // oracle: ‖P − Q‖ = sin φ for two lines at angle φ
        let e1 = OrthogonalProjector::from_span(&DMatrix::from_column_slice(2, 1, &[1.0, 0.0]));
        for &phi in &[0.1f64, 0.5, 1.0, 1.4] {
            let l = OrthogonalProjector::from_span(&DMatrix::from_column_slice(2, 1, &[phi.cos(), phi.sin()]));
            assert!((principal_angle_norm(&e1, &l).unwrap() - phi.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn complement_spans_the_rest() {
        let v = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0]);
        let p = OrthogonalProjector::from_span(&v);
        let c = p.complement();
        assert_eq!(c.rank(), 2);
        let sum = p.materialize() + c.materialize();
        assert!((sum - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-14);
    }
}
