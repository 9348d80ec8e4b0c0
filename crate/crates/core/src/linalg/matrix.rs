use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real symmetric matrix stored by its lower diagonals.
///
/// `diags[d][i]` holds the entry at row `i + d`, column `i`. A dense matrix is
/// simply the banded case with `bandwidth == n - 1`, so symmetry holds by
/// construction and never has to be checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    n: usize,
    diags: Vec<Vec<f64>>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(n.saturating_sub(1));
        let diags = (0..=bandwidth).map(|d| vec![0.0; n - d.min(n)]).collect();
        Self { n, diags }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self { n: values.len(), diags: vec![values.to_vec()] }
    }

    /// Tridiagonal matrix from its diagonal and its first sub-diagonal.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || off.len() + 1 != n {
            return Err(Error::DimensionMismatch { expected: n.saturating_sub(1), found: off.len() });
        }
        if n == 1 {
            return Ok(Self::diagonal(diag));
        }
        Ok(Self { n, diags: vec![diag.to_vec(), off.to_vec()] })
    }

    /// Builds from the lower triangle of `m`; the upper triangle is ignored.
    /// The stored bandwidth is the smallest one covering every nonzero entry.
    pub fn from_lower(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
        }
        let mut bandwidth = 0;
        for j in 0..n {
            for i in (j + 1..n).rev() {
                if m[(i, j)] != 0.0 {
                    bandwidth = bandwidth.max(i - j);
                    break;
                }
            }
        }
        let mut out = Self::zeros(n, bandwidth);
        for d in 0..=out.bandwidth() {
            for i in 0..n - d {
                out.diags[d][i] = m[(i + d, i)];
            }
        }
        Ok(out)
    }

    /// Symmetrizes `(m + mᵀ)/2` first; use for matrices that are symmetric
    /// only up to round-off.
    pub fn from_dense_symmetrized(m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() != m.nrows() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let sym = (m + m.transpose()) * 0.5;
        Self::from_lower(&sym)
    }

    pub fn from_fn(n: usize, bandwidth: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(n, bandwidth);
        for d in 0..=out.bandwidth() {
            for i in 0..n - d {
                out.diags[d][i] = f(i + d, i);
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.diags.len() - 1
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.bandwidth() <= 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        if d > self.bandwidth() {
            0.0
        } else {
            self.diags[d][c]
        }
    }

    /// Sets both `(i, j)` and `(j, i)`.
    ///
    /// # Panics
    /// If `|i - j|` exceeds the stored bandwidth.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        assert!(d <= self.bandwidth(), "entry ({i},{j}) outside bandwidth {}", self.bandwidth());
        self.diags[d][c] = value;
    }

    pub fn diag(&self) -> &[f64] {
        &self.diags[0]
    }

    /// First sub-diagonal (empty for a diagonal matrix).
    pub fn sub_diag(&self) -> &[f64] {
        if self.diags.len() > 1 {
            &self.diags[1]
        } else {
            &[]
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (d, diag) in self.diags.iter().enumerate() {
            for (c, &v) in diag.iter().enumerate() {
                m[(c + d, c)] = v;
                m[(c, c + d)] = v;
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y: Vec<f64> = self.diags[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (d, diag) in self.diags.iter().enumerate().skip(1) {
            for (c, &v) in diag.iter().enumerate() {
                y[c + d] += v * x[c];
                y[c] += v * x[c + d];
            }
        }
        y
    }

    /// `⟨x, A x⟩`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// `self + factor * other`
    pub fn combine(&self, other: &Self, factor: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let bw = self.bandwidth().max(other.bandwidth());
        let mut out = Self::zeros(self.n, bw);
        for d in 0..=bw {
            for c in 0..self.n - d {
                let a = self.diags.get(d).map_or(0.0, |v| v[c]);
                let b = other.diags.get(d).map_or(0.0, |v| v[c]);
                out.diags[d][c] = a + factor * b;
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let diags = self.diags.iter().map(|v| v.iter().map(|x| x * factor).collect()).collect();
        Self { n: self.n, diags }
    }

    /// `A + shift·I`
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        out.diags[0].iter_mut().for_each(|v| *v += shift);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.diags.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.diags.iter().flatten().all(|v| v.is_finite())
    }

    /// Infinity norm (max row sum), an upper bound for the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for (d, diag) in self.diags.iter().enumerate() {
            for (c, &v) in diag.iter().enumerate() {
                rows[c + d] += v.abs();
                if d > 0 {
                    rows[c] += v.abs();
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut radius = vec![0.0; self.n];
        for (d, diag) in self.diags.iter().enumerate().skip(1) {
            for (c, &v) in diag.iter().enumerate() {
                radius[c + d] += v.abs();
                radius[c] += v.abs();
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, r) in self.diags[0].iter().zip(&radius) {
            lo = lo.min(a - r);
            hi = hi.max(a + r);
        }
        (lo, hi)
    }

    /// Compression `Uᵀ A U` to the span of the (orthonormal) columns of `basis`.
    pub fn compress(&self, basis: &DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: basis.nrows() });
        }
        let r = basis.ncols();
        let mut au = DMatrix::zeros(self.n, r);
        for j in 0..r {
            let col: Vec<f64> = basis.column(j).iter().copied().collect();
            let y = self.matvec(&col);
            au.column_mut(j).copy_from_slice(&y);
        }
        let c = basis.transpose() * au;
        Self::from_dense_symmetrized(&c)
    }
}

/// Dense complex Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { data: DMatrix::from_element(n, n, Complex64::new(0.0, 0.0)) }
    }

    /// Builds from the lower triangle (including the diagonal, whose imaginary
    /// part is discarded).
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut out = Self::zeros(n);
        for j in 0..n {
            out.data[(j, j)] = Complex64::new(f(j, j).re, 0.0);
            for i in j + 1..n {
                let v = f(i, j);
                out.data[(i, j)] = v;
                out.data[(j, i)] = v.conj();
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    /// Sets `(i, j)` and the conjugate entry `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        if i == j {
            self.data[(i, i)] = Complex64::new(value.re, 0.0);
        } else {
            self.data[(i, j)] = value;
            self.data[(j, i)] = value.conj();
        }
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Real part as a symmetric matrix.
    pub fn real_part(&self) -> SymmetricMatrix {
        let n = self.n();
        SymmetricMatrix::from_fn(n, n.saturating_sub(1), |i, j| self.data[(i, j)].re)
    }

    /// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of size `2n`. Every
    /// eigenvalue of the Hermitian matrix appears twice in the embedding.
    pub fn embed_real(&self) -> SymmetricMatrix {
        let n = self.n();
        SymmetricMatrix::from_fn(2 * n, 2 * n - 1, |i, j| {
            let (bi, ri) = (i / n, i % n);
            let (bj, rj) = (j / n, j % n);
            let z = self.data[(ri, rj)];
            match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (1, 0) => z.im,
                _ => -z.im,
            }
        })
    }

    pub fn as_dense(&self) -> &DMatrix<Complex64> {
        &self.data
    }
}

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_storage_roundtrip() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 3.0, 4.0, 0.0, 4.0, 5.0]);
        let s = SymmetricMatrix::from_lower(&m).unwrap();
        assert_eq!(s.bandwidth(), 1);
        assert_eq!(s.to_dense(), m);
        assert_eq!(s.get(0, 1), 2.0);
        assert_eq!(s.get(2, 0), 0.0);
        assert_eq!(s.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 9.0, 9.0]);
    }

    #[test]
    fn combine_widens_bandwidth() {
        let a = SymmetricMatrix::identity(4);
        let mut b = SymmetricMatrix::zeros(4, 3);
        b.set(3, 0, 1.5);
        let c = a.add(&b).unwrap();
        assert_eq!(c.bandwidth(), 3);
        assert_eq!(c.get(0, 3), 1.5);
        assert_eq!(c.get(2, 2), 1.0);
    }

    #[test]
    fn hermitian_embedding_is_symmetric() {
        let h = HermitianMatrix::from_lower_fn(2, |i, j| {
            if i == j {
                Complex64::new(i as f64, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            }
        });
        let e = h.embed_real().to_dense();
        assert_eq!(e.clone(), e.transpose());
        assert_eq!(h.get(0, 1), Complex64::new(0.0, -1.0));
    }
}
