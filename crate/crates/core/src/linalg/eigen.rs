//! Symmetric eigensolvers.
//!
//! Dense matrices go through Householder tridiagonalization followed by the
//! implicit-shift QL iteration (the EISPACK `tred2`/`tql2` pair). Tridiagonal
//! matrices, which is what one-dimensional grid operators produce, skip the
//! reduction and go straight to QL; Sturm bisection serves values-only queries.
//! Inverse iteration was tried first and lost orthogonality in clusters.

use nalgebra::DMatrix;
use serde::Serialize;

use super::matrix::{norm2, SymmetricMatrix};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const QL_MAX_SWEEPS: usize = 60;

/// Eigenvalues sorted non-decreasingly, with eigenvector `k` stored in column
/// `k` of an orthogonal matrix.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    #[serde(skip)]
    eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }

    /// Spectral norm of the decomposed matrix.
    pub fn norm(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
            _ => 0.0,
        }
    }

    /// `V diag(λ) Vᵀ`
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(l);
        }
        scaled * self.eigenvectors.transpose()
    }

    /// Largest residual `‖A v_k − λ_k v_k‖` over all pairs.
    pub fn max_residual(&self, a: &SymmetricMatrix) -> f64 {
        (0..self.n())
            .map(|k| {
                let v = self.eigenvector(k);
                let av = a.matvec(&v);
                let r: Vec<f64> = av.iter().zip(&v).map(|(x, y)| x - self.eigenvalues[k] * y).collect();
                norm2(&r)
            })
            .fold(0.0, f64::max)
    }

    /// `‖VᵀV − I‖_max`
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    pub(crate) fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>) -> Self {
        Self { eigenvalues, eigenvectors }
    }
}

/// Full eigendecomposition of a real symmetric matrix.
///
/// The result is deterministic: each eigenvector is normalized so that its
/// largest-magnitude entry (first one on ties) is positive.
pub fn eigendecompose(a: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    let n = a.n();
    if n == 0 {
        return Ok(SpectralDecomposition::from_parts(vec![], DMatrix::zeros(0, 0)));
    }
    check_finite(a)?;
    let (values, mut vectors) = if a.is_tridiagonal() {
        tridiagonal_decompose(a.diag(), a.sub_diag())?
    } else {
        dense_decompose(a)?
    };
    for k in 0..n {
        fix_sign(&mut vectors, k);
    }
    Ok(SpectralDecomposition::from_parts(values, vectors))
}

/// Eigenvalues only, sorted non-decreasingly.
pub fn eigenvalues(a: &SymmetricMatrix) -> Result<Vec<f64>> {
    let n = a.n();
    if n == 0 {
        return Ok(vec![]);
    }
    check_finite(a)?;
    if a.is_tridiagonal() {
        let off = padded_off(a.sub_diag(), n);
        let mut out = Vec::with_capacity(n);
        for (s, e) in split_blocks(a.diag(), &off) {
            let (d, o) = (&a.diag()[s..e], &off[s..e - 1]);
            out.extend((0..e - s).map(|k| if e - s == 1 { d[0] } else { bisect_eigenvalue(d, o, k) }));
        }
        out.sort_by(f64::total_cmp);
        return Ok(out);
    }
    let mut z = vec![0.0; n * n];
    let dense = a.to_dense();
    for i in 0..n {
        for j in 0..n {
            z[i * n + j] = dense[(i, j)];
        }
    }
    let (mut d, mut e) = tred2(&mut z, n);
    tql2(&mut d, &mut e, None, n)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Spectral norm `max |λ|` of a symmetric matrix.
pub fn symmetric_norm(a: &SymmetricMatrix) -> Result<f64> {
    if a.n() == 0 {
        return Ok(0.0);
    }
    if a.is_tridiagonal() {
        check_finite(a)?;
        let off = padded_off(a.sub_diag(), a.n());
        let mut norm = 0.0f64;
        for (s, e) in split_blocks(a.diag(), &off) {
            let (d, o) = (&a.diag()[s..e], &off[s..e - 1]);
            if e - s == 1 {
                norm = norm.max(d[0].abs());
            } else {
                norm = norm.max(bisect_eigenvalue(d, o, 0).abs()).max(bisect_eigenvalue(d, o, e - s - 1).abs());
            }
        }
        return Ok(norm);
    }
    let ev = eigenvalues(a)?;
    Ok(ev[0].abs().max(ev[ev.len() - 1].abs()))
}

fn check_finite(a: &SymmetricMatrix) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "matrix", reason: "non-finite entry".into() })
    }
}

fn fix_sign(v: &mut DMatrix<f64>, k: usize) {
    let mut best = 0usize;
    let mut mag = -1.0;
    for i in 0..v.nrows() {
        let a = v[(i, k)].abs();
        // 1e-12 relative slack keeps the choice stable under round-off when two
        // entries tie in exact arithmetic.
        if a > mag * (1.0 + 1e-12) {
            mag = a;
            best = i;
        }
    }
    if v[(best, k)] < 0.0 {
        v.column_mut(k).neg_mut();
    }
}

fn dense_decompose(a: &SymmetricMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.n();
    let dense = a.to_dense();
    // Row-major working copy; after tred2 it holds the accumulated transform
    // with eigenvector components in columns.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = dense[(i, j)];
        }
    }
    let (mut d, mut e) = tred2(&mut v, n);
    // tql2 rotates pairs of eigenvectors; store them as rows for locality.
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            zt[j * n + i] = v[i * n + j];
        }
    }
    tql2(&mut d, &mut e, Some(&mut zt), n)?;
    Ok(sorted_pairs(d, |k, i| zt[k * n + i], n))
}

fn sorted_pairs(d: Vec<f64>, entry: impl Fn(usize, usize) -> f64, n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, col| entry(order[col], i));
    (values, vectors)
}

/// Householder reduction to tridiagonal form. `v` is an `n×n` row-major
/// matrix that is overwritten with the orthogonal transform. Returns the
/// diagonal and the sub-diagonal (the latter in `e[1..]`).
fn tred2(v: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let idx = |i: usize, j: usize| i * n + j;
    let mut d: Vec<f64> = (0..n).map(|j| v[idx(n - 1, j)]).collect();
    let mut e = vec![0.0; n];

    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for x in d[..i].iter_mut() {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);

            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in j + 1..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
    (d, e)
}

/// Implicit QL on the tridiagonal `(d, e[1..])`. When `zt` is given, its rows
/// are rotated along and end up holding the eigenvectors (row `k` pairs with
/// `d[k]`). Eigenvalues are left unsorted.
fn tql2(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>, n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > EPS * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > QL_MAX_SWEEPS {
                    return Err(Error::NonConvergence { index: l, iterations: QL_MAX_SWEEPS });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for x in d[l + 2..n].iter_mut() {
                    *x -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        let (head, tail) = z.split_at_mut((i + 1) * n);
                        let row_i = &mut head[i * n..];
                        let row_next = &mut tail[..n];
                        for (zi, zn) in row_i.iter_mut().zip(row_next.iter_mut()) {
                            let hv = *zn;
                            *zn = s * *zi + c * hv;
                            *zi = c * *zi - s * hv;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= EPS * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn padded_off(off: &[f64], n: usize) -> Vec<f64> {
    let mut v = off.to_vec();
    v.resize(n.saturating_sub(1), 0.0);
    v
}

fn tridiagonal_scale(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { off[i].abs() } else { 0.0 };
            diag[i].abs() + l + r
        })
        .fold(0.0, f64::max)
}

fn pivmin(off: &[f64]) -> f64 {
    let m = off.iter().fold(1.0f64, |m, b| m.max(b * b));
    f64::MIN_POSITIVE * m
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let pm = pivmin(off);
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pm {
        q = -pm;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q.abs() < pm {
            q = -pm;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) of the tridiagonal matrix by bisection.
pub fn bisect_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = tridiagonal_scale(diag, off).max(f64::MIN_POSITIVE);
    let pad = 2.0 * EPS * scale + pivmin(off);
    lo -= pad;
    hi += pad;
    let atol = 2.0 * EPS * scale;
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= atol.max(2.0 * EPS * lo.abs().max(hi.abs())) || mid <= lo || mid >= hi {
            return mid;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Unreduced diagonal blocks `[start, end)`: the matrix splits wherever an
/// off-diagonal entry is negligible against its diagonal neighbours.
fn split_blocks(diag: &[f64], off: &[f64]) -> Vec<(usize, usize)> {
    let n = diag.len();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..n.saturating_sub(1) {
        if off[i].abs() <= EPS * (diag[i].abs() + diag[i + 1].abs()) * 0.5 || off[i] == 0.0 {
            out.push((start, i + 1));
            start = i + 1;
        }
    }
    out.push((start, n));
    out
}

fn tridiagonal_decompose(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    let off = padded_off(off, n);
    let blocks = split_blocks(diag, &off);
    if blocks.len() == 1 {
        return unreduced_decompose(diag, &off);
    }
    let mut d = Vec::with_capacity(n);
    let mut cols: Vec<(usize, usize, usize)> = Vec::with_capacity(n);
    let mut parts = Vec::with_capacity(blocks.len());
    for (b, &(s, e)) in blocks.iter().enumerate() {
        let (vals, vecs) = if e - s == 1 {
            (vec![diag[s]], DMatrix::from_element(1, 1, 1.0))
        } else {
            unreduced_decompose(&diag[s..e], &off[s..e - 1])?
        };
        for (k, v) in vals.into_iter().enumerate() {
            d.push(v);
            cols.push((b, k, s));
        }
        parts.push(vecs);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let mut vectors = DMatrix::zeros(n, n);
    let values = order.iter().map(|&i| d[i]).collect();
    for (col, &i) in order.iter().enumerate() {
        let (b, k, s) = cols[i];
        let src = parts[b].column(k);
        vectors.view_mut((s, col), (src.len(), 1)).copy_from(&src);
    }
    Ok((values, vectors))
}

/// Implicit QL with accumulated rotations. Inverse iteration was tried here
/// first but loses orthogonality like `ε‖T‖/gap` on close pairs.
fn unreduced_decompose(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(&off[..n - 1]);
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, Some(&mut zt), n)?;
    Ok(sorted_pairs(d, |k, i| zt[k * n + i], n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_gives_permutation_vectors() {
        let a = SymmetricMatrix::diagonal(&[3.0, 1.0, 2.0]);
        let dec = eigendecompose(&a).unwrap();
        assert_eq!(dec.eigenvalues(), &[1.0, 2.0, 3.0]);
        assert_eq!(dec.eigenvector(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(dec.eigenvector(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(dec.eigenvector(2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn swap_matrix_closed_form() {
        let a = SymmetricMatrix::tridiagonal(&[0.0, 0.0], &[1.0]).unwrap();
        let dec = eigendecompose(&a).unwrap();
        assert!((dec.eigenvalue(0) + 1.0).abs() < 1e-15);
        assert!((dec.eigenvalue(1) - 1.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = dec.eigenvector(0);
        let v1 = dec.eigenvector(1);
        // sign convention: first largest-magnitude entry positive
        assert!((v0[0] - s).abs() < 1e-12 && (v0[1] + s).abs() < 1e-12);
        assert!((v1[0] - s).abs() < 1e-12 && (v1[1] - s).abs() < 1e-12);
    }

    #[test]
    fn dense_and_tridiagonal_paths_agree() {
        let diag = [2.0, -1.0, 0.5, 3.0, 1.0];
        let off = [0.3, -1.2, 0.7, 0.05];
        let t = SymmetricMatrix::tridiagonal(&diag, &off).unwrap();
        let mut dense = SymmetricMatrix::zeros(5, 4);
        for i in 0..5 {
            dense.set(i, i, diag[i]);
        }
        for i in 0..4 {
            dense.set(i + 1, i, off[i]);
        }
        let a = eigendecompose(&t).unwrap();
        let b = eigendecompose(&dense).unwrap();
        for k in 0..5 {
            assert!((a.eigenvalue(k) - b.eigenvalue(k)).abs() < 1e-13);
            let (va, vb) = (a.eigenvector(k), b.eigenvector(k));
            for i in 0..5 {
                assert!((va[i] - vb[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sturm_count_matches_known_spectrum() {
        // Dirichlet second-difference matrix of size 4, eigenvalues 2 - 2cos(kπ/5)
        let diag = [2.0; 4];
        let off = [-1.0; 3];
        let exact: Vec<f64> = (1..=4).map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 5.0).cos()).collect();
        assert_eq!(sturm_count(&diag, &off, exact[1] + 1e-9), 2);
        assert_eq!(sturm_count(&diag, &off, exact[1] - 1e-9), 1);
        for (k, e) in exact.iter().enumerate() {
            assert!((bisect_eigenvalue(&diag, &off, k) - e).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_split_tridiagonal() {
        // two identical decoupled blocks produce exact double eigenvalues
        let t = SymmetricMatrix::tridiagonal(&[1.0, 1.0, 1.0, 1.0], &[0.5, 0.0, 0.5]).unwrap();
        let dec = eigendecompose(&t).unwrap();
        assert!(dec.orthogonality_defect() < 1e-12);
        assert!(dec.max_residual(&t) < 1e-12);
        assert!((dec.eigenvalue(0) - dec.eigenvalue(1)).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_only_matches_full() {
        let a = SymmetricMatrix::from_fn(6, 5, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let full = eigendecompose(&a).unwrap();
        let only = eigenvalues(&a).unwrap();
        for (x, y) in full.eigenvalues().iter().zip(&only) {
            assert!((x - y).abs() < 1e-13);
        }
        assert!((symmetric_norm(&a).unwrap() - full.norm()).abs() < 1e-13);
    }

    #[test]
    fn rejects_nan() {
        let a = SymmetricMatrix::diagonal(&[1.0, f64::NAN]);
        assert!(eigendecompose(&a).is_err());
    }
}
