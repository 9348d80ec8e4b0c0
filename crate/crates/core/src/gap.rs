//! Eigenvalues counted outward from a point in a spectral gap, non-positive
//! subspaces, and numerical checks of the two minimax principles for gaps.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    compression_max, compression_min, eigendecompose, eigenvalues, operator_norm, spectral_projector,
    symmetric_norm, Interval, OrthogonalProjector, SpectralDecomposition, SymmetricMatrix,
};
use crate::numfmt;
use crate::synth::gaussian;

/// Relative distance below which `γ` counts as lying on the spectrum.
pub const RESOLVENT_TOL: f64 = 1e-9;

/// Eigenvalues to the left (non-increasing) and right (non-decreasing) of a
/// reference point `γ` in the resolvent set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSpectrum {
    pub gamma: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// `γ − λ^←_1`, `+∞` when nothing lies to the left.
    #[serde(with = "numfmt")]
    pub dist_left: f64,
    /// `λ^→_1 − γ`, `+∞` when nothing lies to the right.
    #[serde(with = "numfmt")]
    pub dist_right: f64,
}

impl GapSpectrum {
    pub fn dist(&self) -> f64 {
        self.dist_left.min(self.dist_right)
    }

    /// `λ^←_k` (1-based).
    pub fn left_k(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.left.get(i).copied())
    }

    /// `λ^→_k` (1-based).
    pub fn right_k(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.right.get(i).copied())
    }
}

pub fn enumerate_gap(dec: &SpectralDecomposition, gamma: f64) -> Result<GapSpectrum> {
    let tol = RESOLVENT_TOL * dec.norm();
    let distance = dec.eigenvalues().iter().map(|l| (l - gamma).abs()).fold(f64::INFINITY, f64::min);
    if dec.n() > 0 && distance <= tol {
        return Err(Error::GammaOnSpectrum { gamma, distance });
    }
    let mut left: Vec<f64> = dec.eigenvalues().iter().copied().filter(|&l| l < gamma).collect();
    left.reverse();
    let right: Vec<f64> = dec.eigenvalues().iter().copied().filter(|&l| l > gamma).collect();
    let dist_left = left.first().map_or(f64::INFINITY, |l| gamma - l);
    let dist_right = right.first().map_or(f64::INFINITY, |r| r - gamma);
    Ok(GapSpectrum { gamma, left, right, dist_left, dist_right })
}

pub fn gap_spectrum_of(a: &SymmetricMatrix, gamma: f64) -> Result<GapSpectrum> {
    enumerate_gap(&eigendecompose(a)?, gamma)
}

fn form_tol(a: &SymmetricMatrix, gamma: f64) -> Result<f64> {
    Ok(1e-10 * (symmetric_norm(a)? + gamma.abs()).max(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonPositiveWitness {
    pub maximal_nonpositive: bool,
    /// Largest eigenvalue of `A − γ` compressed to the subspace.
    #[serde(with = "numfmt")]
    pub max_on_subspace: f64,
    /// Smallest eigenvalue of `A − γ` compressed to the orthogonal complement.
    #[serde(with = "numfmt")]
    pub min_on_complement: f64,
}

/// Whether the range of `sub` is a maximal `(A − γ)`-non-positive subspace.
pub fn is_maximal_nonpositive(sub: &OrthogonalProjector, a: &SymmetricMatrix, gamma: f64) -> Result<NonPositiveWitness> {
    if sub.ambient_dim() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: sub.ambient_dim() });
    }
    let shifted = a.shifted(-gamma);
    let tol = form_tol(a, gamma)?;
    let max_on_subspace = compression_max(&shifted, sub.basis())?;
    let min_on_complement = compression_min(&shifted, sub.complement().basis())?;
    Ok(NonPositiveWitness {
        maximal_nonpositive: max_on_subspace <= tol && min_on_complement > tol,
        max_on_subspace,
        min_on_complement,
    })
}

/// `inf_{L ⊂ M, dim L = k−1} sup_{x ∈ M ⊖ L, ‖x‖ = 1} ⟨x, Ax⟩`, the `k`-th
/// largest eigenvalue of `A` compressed to `M`.
pub fn langer_strauss_value(a: &SymmetricMatrix, gamma: f64, m: &OrthogonalProjector, k: usize) -> Result<f64> {
    if k == 0 || k > m.rank() {
        return Err(Error::InvalidParameter { name: "k", reason: format!("{k} not in 1..={}", m.rank()) });
    }
    let tol = form_tol(a, gamma)?;
    let top = compression_max(&a.shifted(-gamma), m.basis())?;
    if top > tol {
        return Err(Error::Precondition(format!("subspace is not (A − γ)-non-positive: max form {top:e}")));
    }
    let c = a.compress(m.basis())?;
    let ev = eigenvalues(&c)?;
    Ok(ev[ev.len() - k])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub pass: bool,
    #[serde(with = "numfmt")]
    pub witness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxProbes {
    /// Sup values for random `M₊ ⊂ Ran Q₊`; each must be at least the reference.
    pub lower: Vec<f64>,
    #[serde(with = "numfmt")]
    pub lower_min: f64,
    /// Sup value for `M₊ = Q₊`-image of the first `n` eigenvectors above `γ`.
    #[serde(with = "numfmt")]
    pub achievability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxReport {
    pub n: usize,
    pub reference: f64,
    pub probes: MinimaxProbes,
    pub hypotheses: Vec<Hypothesis>,
    pub tolerance: f64,
    #[serde(with = "numfmt")]
    pub gap: f64,
    pub pass: bool,
}

fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Default relative tolerance for the minimax comparisons.
pub const MINIMAX_TOL: f64 = 1e-8;

/// Compares `λ_n(A|_{Ran P₊})` with the minimax value over subspaces built
/// from the spectral subspaces of `D = A + B`.
pub fn gls_minimax(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    gamma: f64,
    n: usize,
    probes: usize,
    rng: &mut impl Rng,
) -> Result<MinimaxReport> {
    let d = a.add(b)?;
    let dec_a = eigendecompose(a)?;
    let dec_d = eigendecompose(&d)?;
    let p_plus = spectral_projector(&dec_a, Interval::above(gamma));
    let p_minus = spectral_projector(&dec_a, Interval::at_most(gamma));
    let q_plus = spectral_projector(&dec_d, Interval::above(gamma));
    let q_minus = spectral_projector(&dec_d, Interval::at_most(gamma));
    if n == 0 || n > q_plus.rank() || n > p_plus.rank() {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("{n} not in 1..=min(dim Ran Q₊ = {}, dim Ran P₊ = {})", q_plus.rank(), p_plus.rank()),
        });
    }
    let tolerance = MINIMAX_TOL * dec_a.norm().max(f64::MIN_POSITIVE);
    let form = compression_max(&a.shifted(-gamma), q_minus.basis())?;
    let overlap = operator_norm(&(q_plus.basis().transpose() * p_minus.basis()))?;
    let hypotheses = vec![
        Hypothesis { name: "form_nonpositive_on_Q-".into(), pass: form <= form_tol(a, gamma)?, witness: form },
        Hypothesis { name: "norm_Q+P-_below_1".into(), pass: overlap < 1.0 - 1e-12, witness: overlap },
    ];
    let reference = dec_a.eigenvalues().iter().copied().filter(|&l| l > gamma).nth(n - 1).unwrap_or(f64::NAN);

    let up = q_plus.basis();
    let r = up.ncols();
    let mut lower = Vec::with_capacity(probes);
    for _ in 0..probes {
        let coeffs = DMatrix::from_fn(r, n, |_, _| gaussian(rng));
        let m_plus = OrthogonalProjector::from_span(&(up * coeffs));
        let basis = hcat(m_plus.basis(), q_minus.basis());
        lower.push(compression_max(a, &basis)?);
    }
    let lower_min = lower.iter().copied().fold(f64::INFINITY, f64::min);
    let first = p_plus.basis().columns(0, n).into_owned();
    let image = q_plus.materialize() * first;
    let m_plus = OrthogonalProjector::from_span(&image);
    let achievability = if m_plus.rank() == n {
        compression_max(a, &hcat(m_plus.basis(), q_minus.basis()))?
    } else {
        f64::INFINITY
    };
    let gap = (achievability - reference).abs();
    let hyp_ok = hypotheses.iter().all(|h| h.pass);
    let pass = hyp_ok && lower_min >= reference - tolerance && gap <= tolerance;
    Ok(MinimaxReport {
        n,
        reference,
        probes: MinimaxProbes { lower, lower_min, achievability },
        hypotheses,
        tolerance,
        gap,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub power: usize,
    /// `‖S^k‖_Λ^{1/k}` in the graph norm of `(I + Λ²)^{1/2}`.
    pub proxy: f64,
    /// `(‖S‖^k + k‖K‖‖S‖^{k−1})^{1/k}`, the bound from the commutator identity.
    pub proof_bound: f64,
    /// `max |eig(S)|`.
    pub exact_radius: f64,
    /// Whether the finite-`k` proxy already sits below `‖S‖ + 10⁻⁶`.
    pub proxy_within_norm: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomorphismReport {
    pub dim_k: usize,
    pub s_norm: f64,
    pub k_norm: f64,
    pub t_min_singular: f64,
    pub t_invertible: bool,
    pub sylvester_residual: f64,
    pub neumann_order: usize,
    pub neumann_error: f64,
    pub neumann_bound: f64,
    pub neumann_ok: bool,
    pub radius: RadiusReport,
    pub domain_preservation: String,
    pub pass: bool,
}

pub const SYLVESTER_TOL: f64 = 1e-12;

pub fn automorphism_check(a: &SymmetricMatrix, b: &SymmetricMatrix, gamma: f64) -> Result<AutomorphismReport> {
    automorphism_check_with(a, b, gamma, 20, 32)
}

fn sym(m: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    SymmetricMatrix::from_dense_symmetrized(m)
}

/// Materializes `S = Q₊P₋|_K`, `T = I − S`, `Λ = D|_K` and
/// `K = (Q₊P₋B − Q₊BP₋)|_K` on `K = Ran Q₊` and checks the identities that
/// make `Q₊P₊` an automorphism of `K`.
pub fn automorphism_check_with(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    gamma: f64,
    neumann_order: usize,
    power: usize,
) -> Result<AutomorphismReport> {
    let d = a.add(b)?;
    let dec_a = eigendecompose(a)?;
    let dec_d = eigendecompose(&d)?;
    let p_minus = spectral_projector(&dec_a, Interval::at_most(gamma));
    let q_plus = spectral_projector(&dec_d, Interval::above(gamma));
    let u = q_plus.basis();
    let r = u.ncols();
    let overlap = operator_norm(&(u.transpose() * p_minus.basis()))?;
    if overlap >= 1.0 {
        return Err(Error::Precondition(format!("‖Q₊P₋‖ = {overlap} is not below 1")));
    }
    let pm = p_minus.materialize();
    let bd = b.to_dense();
    let s = u.transpose() * &pm * u;
    let lambda = u.transpose() * d.to_dense() * u;
    let k = u.transpose() * (&pm * &bd - &bd * &pm) * u;
    let sylvester_residual = if r == 0 { 0.0 } else { (&s * &lambda - &lambda * &s - &k).abs().max() };

    let s_sym = sym(&s)?;
    let s_norm = symmetric_norm(&s_sym)?;
    let k_norm = operator_norm(&k)?;
    let t = DMatrix::identity(r, r) - s_sym.to_dense();
    let t_dec = eigendecompose(&sym(&t)?)?;
    let t_min_singular = t_dec.eigenvalues().iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let t_min_singular = if r == 0 { 1.0 } else { t_min_singular };
    let t_invertible = t_min_singular > 0.0 && t_min_singular >= 1.0 - s_norm - 1e-12;

    // T⁻¹ from the spectral decomposition, against the truncated Neumann series
    let t_inv = {
        let vals = nalgebra::DVector::from_iterator(r, t_dec.eigenvalues().iter().map(|x| 1.0 / x));
        t_dec.eigenvectors() * DMatrix::from_diagonal(&vals) * t_dec.eigenvectors().transpose()
    };
    // same symmetrized S as T, so both sides see identical input
    let s_dense = s_sym.to_dense();
    let mut partial = DMatrix::identity(r, r);
    let mut term = DMatrix::identity(r, r);
    for _ in 0..neumann_order {
        term = &term * &s_dense;
        partial += &term;
    }
    let neumann_error = operator_norm(&(t_inv - partial))?;
    let neumann_bound = s_norm.powi(neumann_order as i32 + 1) / (1.0 - s_norm);
    // S is positive semidefinite here, so the bound is attained and can only
    // be compared up to the rounding floor of forming T⁻¹
    let rounding = 8.0 * (r.max(1) as f64) * f64::EPSILON / (1.0 - s_norm);
    let neumann_ok = neumann_error <= neumann_bound * (1.0 + 1e-9) + rounding;

    let radius = {
        let lam_dec = eigendecompose(&sym(&lambda)?)?;
        let w = lam_dec.eigenvectors();
        let g = |inv: bool| {
            let v = nalgebra::DVector::from_iterator(
                r,
                lam_dec.eigenvalues().iter().map(|l| {
                    let x = (1.0 + l * l).sqrt();
                    if inv {
                        1.0 / x
                    } else {
                        x
                    }
                }),
            );
            w * DMatrix::from_diagonal(&v) * w.transpose()
        };
        let mut sk = DMatrix::identity(r, r);
        for _ in 0..power {
            sk = &sk * &s;
        }
        let graph = g(false) * sk * g(true);
        let proxy = operator_norm(&graph)?.powf(1.0 / power as f64);
        let kf = power as f64;
        let proof_bound = (s_norm.powi(power as i32) + kf * k_norm * s_norm.powi(power as i32 - 1)).powf(1.0 / kf);
        let exact_radius = eigenvalues(&s_sym)?.iter().map(|x| x.abs()).fold(0.0, f64::max);
        RadiusReport { power, proxy, proof_bound, exact_radius, proxy_within_norm: proxy <= s_norm + 1e-6 }
    };
    let pass = sylvester_residual <= SYLVESTER_TOL
        && t_invertible
        && neumann_ok
        && radius.proxy <= radius.proof_bound * (1.0 + 1e-9) + 1e-14
        && radius.exact_radius <= s_norm + 1e-12;
    Ok(AutomorphismReport {
        dim_k: r,
        s_norm,
        k_norm,
        t_min_singular,
        t_invertible,
        sylvester_residual,
        neumann_order,
        neumann_error,
        neumann_bound,
        neumann_ok,
        radius,
        domain_preservation: "structural: in finite dimension D₊ = Ran Q₊ and every bounded map preserves it".into(),
        pass,
    })
}
