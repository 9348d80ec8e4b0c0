//! Dense and banded symmetric eigensolvers, spectral projectors and norms.
//!
//! All types are immutable once built and every routine is a pure function.

mod band;
mod eigen;
mod matrix;
mod projector;

use nalgebra::DMatrix;

pub use band::{fold_ring, HermitianBand};
pub use eigen::{
    bisect_eigenvalue, eigendecompose, eigenvalues, sturm_count, symmetric_norm, SpectralDecomposition,
};
pub use matrix::{dot, norm2, HermitianMatrix, SymmetricMatrix};
pub use projector::{
    principal_angle_norm, spectral_projector, spectral_projector_with_snap, Bound, Interval, OrthogonalProjector,
    DEFAULT_SNAP,
};

use crate::error::Result;

/// Largest singular value of a general matrix, computed as the square root of
/// the top eigenvalue of the smaller Gram matrix.
pub fn operator_norm(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let gram = if a.nrows() <= a.ncols() { a * a.transpose() } else { a.transpose() * a };
    let g = SymmetricMatrix::from_dense_symmetrized(&gram)?;
    let ev = eigenvalues(&g)?;
    Ok(ev[ev.len() - 1].max(0.0).sqrt())
}

/// Smallest eigenvalue of the compression `Uᵀ A U`; `+∞` for an empty basis.
pub fn compression_min(a: &SymmetricMatrix, basis: &DMatrix<f64>) -> Result<f64> {
    if basis.ncols() == 0 {
        return Ok(f64::INFINITY);
    }
    let c = a.compress(basis)?;
    Ok(eigenvalues(&c)?[0])
}

/// Largest eigenvalue of the compression `Uᵀ A U`; `−∞` for an empty basis.
pub fn compression_max(a: &SymmetricMatrix, basis: &DMatrix<f64>) -> Result<f64> {
    if basis.ncols() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let c = a.compress(basis)?;
    let ev = eigenvalues(&c)?;
    Ok(ev[ev.len() - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_diagonal_and_swap() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -3.0]);
        assert!((operator_norm(&a).unwrap() - 3.0).abs() < 1e-14);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.25, 0.25, 0.0]);
        assert!((operator_norm(&b).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn norm_of_rectangular() {
        let a = DMatrix::from_row_slice(1, 3, &[3.0, 0.0, 4.0]);
        assert!((operator_norm(&a).unwrap() - 5.0).abs() < 1e-14);
    }
}
