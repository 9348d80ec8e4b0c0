//! Verifiers for the lifting inequalities below and inside spectral gaps,
//! plus the projector-rotation and interval-movement checks.

use serde::{Deserialize, Serialize};

use super::certificate::{hypothesis, param, IndexShift, Param, LiftingCertificate, TheoremTag, MARGIN_TOL, POSITIVITY_TOL};
use crate::error::{Error, Result};
use crate::gap::{enumerate_gap, GapSpectrum, Hypothesis};
use crate::linalg::{
    compression_min, eigendecompose, eigenvalues, principal_angle_norm, spectral_projector, symmetric_norm, Interval,
    SpectralDecomposition, SymmetricMatrix,
};
use crate::numfmt;

/// Largest number of intermediate couplings tried by the optimal left variant.
pub const MAX_COUPLING_STEPS: usize = 4096;

fn same_size(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: b.n() });
    }
    Ok(())
}

fn spectrum_bounds(a: &SymmetricMatrix) -> Result<(f64, f64)> {
    let ev = eigenvalues(a)?;
    Ok(match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    })
}

/// Smallest eigenvalue of `W` compressed to `Ran E_D(interval)`.
fn form_min_on(w: &SymmetricMatrix, dec: &SpectralDecomposition, interval: Interval) -> Result<f64> {
    compression_min(w, spectral_projector(dec, interval).basis())
}

fn ptol(scale: f64) -> f64 {
    POSITIVITY_TOL * scale.max(f64::MIN_POSITIVE)
}

fn margin_tol(a: &SymmetricMatrix, sum: &SymmetricMatrix) -> Result<f64> {
    Ok(MARGIN_TOL * symmetric_norm(a)?.max(symmetric_norm(sum)?).max(f64::MIN_POSITIVE))
}

fn positivity_hypothesis(name: &str, form_min: f64, kappa: f64, scale: f64) -> Hypothesis {
    hypothesis(name, form_min >= kappa - ptol(scale), form_min - kappa)
}

/// `λ_k(H + W) ≥ λ_k(H) + κ` for every `k` with `λ_k(H + W) < E`, provided
/// `⟨x, Wx⟩ ≥ κ‖x‖²` on `Ran P_{H+W}(E)`.
pub fn verify_bottom_lifting(h: &SymmetricMatrix, w: &SymmetricMatrix, energy: f64, kappa: f64) -> Result<LiftingCertificate> {
    same_size(h, w)?;
    let sum = h.add(w)?;
    let dec_sum = eigendecompose(&sum)?;
    let w_norm = symmetric_norm(w)?;
    let fmin = form_min_on(w, &dec_sum, Interval::at_most(energy))?;
    let pre = vec![positivity_hypothesis("form_bound_on_Ran_P(E)", fmin, kappa, w_norm.max(kappa.abs()))];
    let inputs = vec![
        param("n", h.n() as f64),
        param("energy", energy),
        param("norm_H", symmetric_norm(h)?),
        param("norm_W", w_norm),
        param("form_min", fmin),
    ];
    let tol = margin_tol(h, &sum)?;
    LiftingCertificate::assemble(
        TheoremTag::Bottom,
        "scalar",
        inputs,
        kappa,
        pre,
        || {
            let before = eigenvalues(h)?;
            Ok(dec_sum
                .eigenvalues()
                .iter()
                .zip(&before)
                .enumerate()
                .take_while(|(_, (&after, _))| after < energy)
                .map(|(i, (&after, &b))| IndexShift::new(i + 1, b, after, b + kappa))
                .collect())
        },
        tol,
    )
}

/// Monotonicity of `t ↦ λ_k(H + tW)` along an increasing coupling grid for
/// `W ≥ 0`. Each index records its smallest step increment as the margin.
pub fn verify_monotone(h: &SymmetricMatrix, w: &SymmetricMatrix, ts: &[f64]) -> Result<LiftingCertificate> {
    same_size(h, w)?;
    let (w_min, w_max) = spectrum_bounds(w)?;
    let w_norm = w_min.abs().max(w_max.abs());
    let increasing = ts.len() >= 2 && ts.windows(2).all(|p| p[1] > p[0]);
    let pre = vec![
        hypothesis("W_nonnegative", w_min >= -ptol(w_norm), w_min),
        hypothesis("t_grid_increasing", increasing, ts.len() as f64),
    ];
    let inputs = vec![param("n", h.n() as f64), param("norm_W", w_norm), param("steps", ts.len() as f64)];
    let top = h.combine(w, ts.last().copied().unwrap_or(0.0))?;
    let tol = margin_tol(h, &top)?;
    LiftingCertificate::assemble(
        TheoremTag::Monotone,
        "coupling",
        inputs,
        0.0,
        pre,
        || {
            let spectra: Vec<Vec<f64>> = ts.iter().map(|&t| eigenvalues(&h.combine(w, t)?)).collect::<Result<_>>()?;
            let first = &spectra[0];
            let last = &spectra[spectra.len() - 1];
            Ok((0..h.n())
                .map(|k| {
                    let step_min = spectra.windows(2).map(|p| p[1][k] - p[0][k]).fold(f64::INFINITY, f64::min);
                    let mut s = IndexShift::new(k + 1, first[k], last[k], first[k]);
                    s.margin = step_min;
                    s
                })
                .collect())
        },
        tol,
    )
}

fn gap_or_hypothesis(dec: &SpectralDecomposition, gamma: f64, name: &str) -> Result<(Option<GapSpectrum>, Hypothesis)> {
    match enumerate_gap(dec, gamma) {
        Ok(gs) => {
            let d = gs.dist();
            Ok((Some(gs), hypothesis(name, true, d)))
        }
        Err(Error::GammaOnSpectrum { distance, .. }) => Ok((None, hypothesis(name, false, distance))),
        Err(e) => Err(e),
    }
}

fn left_shifts(before: &GapSpectrum, after: &GapSpectrum, offset: f64) -> Vec<IndexShift> {
    let count = before.left.len().max(after.left.len());
    (1..=count)
        .map(|k| {
            let b = before.left_k(k).unwrap_or(f64::NEG_INFINITY);
            let a = after.left_k(k).unwrap_or(f64::NEG_INFINITY);
            IndexShift::new(k, b, a, b + offset)
        })
        .filter(|s| !(s.after == f64::NEG_INFINITY && s.comparator == f64::NEG_INFINITY))
        .collect()
}

fn right_shifts(before: &GapSpectrum, after: &GapSpectrum, offset: f64, energy: f64) -> Vec<IndexShift> {
    after
        .right
        .iter()
        .enumerate()
        .take_while(|(_, &a)| a < energy)
        .map(|(i, &a)| {
            let b = before.right_k(i + 1).unwrap_or(f64::INFINITY);
            IndexShift::new(i + 1, b, a, b + offset)
        })
        .collect()
}

/// Which hypothesis on the perturbation a left-gap certificate relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeftVariant {
    /// `‖B‖ < dist(γ, σ(A))/2`
    Norm,
    /// `0 ≤ B < dist(γ, σ(A))`
    NonNegative,
    /// `0 ≤ B < dist^←(γ, σ(A))`, positivity along `n` intermediate couplings.
    Opt,
}

impl LeftVariant {
    fn label(self) -> &'static str {
        match self {
            LeftVariant::Norm => "norm",
            LeftVariant::NonNegative => "nonneg",
            LeftVariant::Opt => "opt",
        }
    }
}

/// `λ^←_{k,γ}(A + B) ≥ λ^←_{k,γ}(A) + κ` under the chosen hypothesis.
pub fn verify_gap_lifting_left(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    gamma: f64,
    kappa: f64,
    variant: LeftVariant,
) -> Result<LiftingCertificate> {
    same_size(a, b)?;
    let sum = a.add(b)?;
    let dec_a = eigendecompose(a)?;
    let dec_sum = eigendecompose(&sum)?;
    let (b_min, b_max) = spectrum_bounds(b)?;
    let b_norm = b_min.abs().max(b_max.abs());
    let (gs_a, h_res) = gap_or_hypothesis(&dec_a, gamma, "gamma_in_resolvent_A")?;
    let mut pre = vec![h_res];
    let mut inputs = vec![param("n", a.n() as f64), param("gamma", gamma), param("norm_B", b_norm)];
    let mut steps = 1usize;
    if let Some(gs) = &gs_a {
        inputs.push(param("dist_left", gs.dist_left));
        inputs.push(param("dist_right", gs.dist_right));
        let dist = gs.dist();
        match variant {
            LeftVariant::Norm => {
                pre.push(hypothesis("norm_B_below_half_dist", b_norm < 0.5 * dist, 0.5 * dist - b_norm));
            }
            LeftVariant::NonNegative => {
                pre.push(hypothesis("B_nonnegative", b_min >= -ptol(b_norm), b_min));
                pre.push(hypothesis("B_below_dist", b_max < dist, dist - b_max));
            }
            LeftVariant::Opt => {
                pre.push(hypothesis("B_nonnegative", b_min >= -ptol(b_norm), b_min));
                pre.push(hypothesis("B_below_dist_left", b_max < gs.dist_left, gs.dist_left - b_max));
                let ratio = b_norm / gs.dist_right;
                let n = if ratio.is_finite() { ratio.floor() as usize + 1 } else { usize::MAX };
                pre.push(hypothesis("coupling_steps_bounded", n <= MAX_COUPLING_STEPS, n as f64));
                steps = n.min(MAX_COUPLING_STEPS);
                inputs.push(param("coupling_steps", n as f64));
            }
        }
    }
    let scale = b_norm.max(kappa.abs());
    let positivity = if variant == LeftVariant::Opt && pre.iter().all(|h| h.pass) {
        // ⟨x, Bx⟩ ≥ κ‖x‖² on every Ran P_{A+jB/n}(γ), checked range by range
        let mut worst = f64::INFINITY;
        for j in 1..=steps {
            let dec_j = if j == steps { dec_sum.clone() } else { eigendecompose(&a.combine(b, j as f64 / steps as f64)?)? };
            worst = worst.min(form_min_on(b, &dec_j, Interval::at_most(gamma))?);
        }
        positivity_hypothesis("form_bound_on_union_of_Ran_P(gamma)", worst, kappa, scale)
    } else {
        let fmin = form_min_on(b, &dec_sum, Interval::at_most(gamma))?;
        positivity_hypothesis("form_bound_on_Ran_P(gamma)", fmin, kappa, scale)
    };
    pre.push(positivity);
    let tag = if variant == LeftVariant::Opt { TheoremTag::GapLeftOpt } else { TheoremTag::GapLeft };
    let tol = margin_tol(a, &sum)?;
    LiftingCertificate::assemble(
        tag,
        variant.label(),
        inputs,
        kappa,
        pre,
        || {
            let gs_sum = enumerate_gap(&dec_sum, gamma)?;
            Ok(left_shifts(gs_a.as_ref().expect("checked"), &gs_sum, kappa))
        },
        tol,
    )
}

/// Hypothesis on `B − C` in the operator-comparison form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparisonVariant {
    /// `‖B − C‖ < dist(γ, σ(A + C))/2`
    Norm,
    /// `0 ≤ B − C < dist(γ, σ(A + C))`
    NonNegative,
}

/// `λ^←_{k,γ}(A + B) ≥ λ^←_{k,γ}(A + C)` when `B ≥ C` in form sense on
/// `Ran P_{A+B}(γ)` and `B − C` satisfies the chosen hypothesis.
pub fn verify_gap_comparison_left(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    c: &SymmetricMatrix,
    gamma: f64,
    variant: ComparisonVariant,
) -> Result<LiftingCertificate> {
    same_size(a, b)?;
    same_size(a, c)?;
    let ac = a.add(c)?;
    let ab = a.add(b)?;
    let diff = b.sub(c)?;
    let dec_ac = eigendecompose(&ac)?;
    let dec_ab = eigendecompose(&ab)?;
    let (d_min, d_max) = spectrum_bounds(&diff)?;
    let d_norm = d_min.abs().max(d_max.abs());
    let (gs_ac, h_res) = gap_or_hypothesis(&dec_ac, gamma, "gamma_in_resolvent_A+C")?;
    let mut pre = vec![h_res];
    let mut inputs = vec![param("n", a.n() as f64), param("gamma", gamma), param("norm_B-C", d_norm)];
    if let Some(gs) = &gs_ac {
        let dist = gs.dist();
        inputs.push(param("dist", dist));
        match variant {
            ComparisonVariant::Norm => {
                pre.push(hypothesis("norm_B-C_below_half_dist", d_norm < 0.5 * dist, 0.5 * dist - d_norm));
            }
            ComparisonVariant::NonNegative => {
                pre.push(hypothesis("B-C_nonnegative", d_min >= -ptol(d_norm), d_min));
                pre.push(hypothesis("B-C_below_dist", d_max < dist, dist - d_max));
            }
        }
    }
    let fmin = form_min_on(&diff, &dec_ab, Interval::at_most(gamma))?;
    pre.push(positivity_hypothesis("B_dominates_C_on_Ran_P(gamma)", fmin, 0.0, d_norm));
    let tol = margin_tol(&ac, &ab)?;
    let label = match variant {
        ComparisonVariant::Norm => "compare-norm",
        ComparisonVariant::NonNegative => "compare-nonneg",
    };
    LiftingCertificate::assemble(
        TheoremTag::GapLeft,
        label,
        inputs,
        0.0,
        pre,
        || {
            let gs_ab = enumerate_gap(&dec_ab, gamma)?;
            Ok(left_shifts(gs_ac.as_ref().expect("checked"), &gs_ab, 0.0))
        },
        tol,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RightVariant {
    /// `‖B‖ ≤ dist(γ, σ(A))/2`
    Norm,
    /// `0 ≤ B < dist^←(γ, σ(A))`
    NonNegative,
}

fn right_common(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    gamma: f64,
    energy: f64,
    dec_a: &SpectralDecomposition,
) -> Result<(Option<GapSpectrum>, Vec<Hypothesis>, Vec<Param>)> {
    same_size(a, b)?;
    let (gs_a, h_res) = gap_or_hypothesis(dec_a, gamma, "gamma_in_resolvent_A")?;
    let pre = vec![h_res, hypothesis("energy_above_gamma", energy > gamma, energy - gamma)];
    let mut inputs = vec![param("n", a.n() as f64), param("gamma", gamma), param("energy", energy)];
    if let Some(gs) = &gs_a {
        inputs.push(param("dist_left", gs.dist_left));
        inputs.push(param("dist_right", gs.dist_right));
    }
    Ok((gs_a, pre, inputs))
}


/// `λ^→_{k,γ}(A + B) ≥ λ^→_{k,γ}(A) + κ` for `k` with `λ^→_{k,γ}(A + B) < E`.
pub fn verify_gap_lifting_right(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    gamma: f64,
    kappa: f64,
    energy: f64,
    variant: RightVariant,
) -> Result<LiftingCertificate> {
    let dec_a = eigendecompose(a)?;
    let (gs_a, mut pre, mut inputs) = right_common(a, b, gamma, energy, &dec_a)?;
    let sum = a.add(b)?;
    let dec_sum = eigendecompose(&sum)?;
    let (b_min, b_max) = spectrum_bounds(b)?;
    let b_norm = b_min.abs().max(b_max.abs());
    inputs.push(param("norm_B", b_norm));
    if let Some(gs) = &gs_a {
        match variant {
            RightVariant::Norm => {
                let half = 0.5 * gs.dist();
                pre.push(hypothesis("norm_B_at_most_half_dist", b_norm <= half, half - b_norm));
            }
            RightVariant::NonNegative => {
                pre.push(hypothesis("B_nonnegative", b_min >= -ptol(b_norm), b_min));
                pre.push(hypothesis("B_below_dist_left", b_max < gs.dist_left, gs.dist_left - b_max));
            }
        }
    }
    let fmin = form_min_on(b, &dec_sum, Interval::at_most(energy))?;
    pre.push(positivity_hypothesis("form_bound_on_Ran_P(E)", fmin, kappa, b_norm.max(kappa.abs())));
    let (tag, label) = match variant {
        RightVariant::Norm => (TheoremTag::GapRight, "norm"),
        RightVariant::NonNegative => (TheoremTag::GapRightOpt, "nonneg"),
    };
    let tol = margin_tol(a, &sum)?;
    LiftingCertificate::assemble(
        tag,
        label,
        inputs,
        kappa,
        pre,
        || {
            let gs_sum = enumerate_gap(&dec_sum, gamma)?;
            Ok(right_shifts(gs_a.as_ref().expect("checked"), &gs_sum, kappa, energy))
        },
        tol,
    )
}

/// `λ^→_{k,γ}(A + B) ≥ λ^→_{k,γ}(A + C)` for `0 ≤ C ≤ B < dist^←(γ, σ(A))`
/// and `B ≥ C` in form sense on `Ran P_{A+B}(E)`.
pub fn verify_gap_comparison_right(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    c: &SymmetricMatrix,
    gamma: f64,
    energy: f64,
) -> Result<LiftingCertificate> {
    same_size(a, c)?;
    let dec_a = eigendecompose(a)?;
    let (gs_a, mut pre, mut inputs) = right_common(a, b, gamma, energy, &dec_a)?;
    let ab = a.add(b)?;
    let ac = a.add(c)?;
    let diff = b.sub(c)?;
    let (b_min, b_max) = spectrum_bounds(b)?;
    let (c_min, _) = spectrum_bounds(c)?;
    let (d_min, d_max) = spectrum_bounds(&diff)?;
    let b_norm = b_min.abs().max(b_max.abs());
    inputs.push(param("norm_B", b_norm));
    pre.push(hypothesis("C_nonnegative", c_min >= -ptol(b_norm), c_min));
    pre.push(hypothesis("C_below_B", d_min >= -ptol(b_norm), d_min));
    if let Some(gs) = &gs_a {
        pre.push(hypothesis("B_below_dist_left", b_max < gs.dist_left, gs.dist_left - b_max));
    }
    let dec_ab = eigendecompose(&ab)?;
    let fmin = form_min_on(&diff, &dec_ab, Interval::at_most(energy))?;
    pre.push(positivity_hypothesis("B_dominates_C_on_Ran_P(E)", fmin, 0.0, d_min.abs().max(d_max.abs())));
    let tol = margin_tol(&ac, &ab)?;
    LiftingCertificate::assemble(
        TheoremTag::GapRightOpt,
        "compare",
        inputs,
        0.0,
        pre,
        || {
            let gs_ab = enumerate_gap(&dec_ab, gamma)?;
            let gs_ac = enumerate_gap(&eigendecompose(&ac)?, gamma)?;
            Ok(right_shifts(&gs_ac, &gs_ab, 0.0, energy))
        },
        tol,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DavisKahanReport {
    pub dist: f64,
    pub norm_b: f64,
    /// `‖P_{A+B}(γ) − P_A(γ)‖`
    pub measured: f64,
    /// `sin(½ arcsin(2‖B‖/dist))`
    pub bound: f64,
    pub pass: bool,
}

/// Rotation of the spectral projector at `γ` against the `sin 2Θ` bound.
pub fn davis_kahan_check(a: &SymmetricMatrix, b: &SymmetricMatrix, gamma: f64) -> Result<DavisKahanReport> {
    same_size(a, b)?;
    let dec_a = eigendecompose(a)?;
    let gs = enumerate_gap(&dec_a, gamma)?;
    let dist = gs.dist();
    let norm_b = symmetric_norm(b)?;
    if 2.0 * norm_b > dist {
        return Err(Error::Precondition(format!("2‖B‖ = {} exceeds dist(γ, σ(A)) = {dist}", 2.0 * norm_b)));
    }
    let dec_sum = eigendecompose(&a.add(b)?)?;
    let p = spectral_projector(&dec_a, Interval::at_most(gamma));
    let q = spectral_projector(&dec_sum, Interval::at_most(gamma));
    let measured = principal_angle_norm(&p, &q)?;
    let bound = if dist.is_finite() { (0.5 * (2.0 * norm_b / dist).min(1.0).asin()).sin() } else { 0.0 };
    let pass = measured <= bound + 1e-12 && bound <= std::f64::consts::FRAC_1_SQRT_2 + 1e-15;
    Ok(DavisKahanReport { dist, norm_b, measured, bound, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalMovementReport {
    pub a: f64,
    pub b: f64,
    pub norm_b: f64,
    /// Eigenvalues of `A + B` found strictly inside `(a + ‖B‖, b)`.
    pub offending: Vec<f64>,
    /// Distance from the moved interval to the nearest eigenvalue of `A + B`
    /// inside `[a + ‖B‖, b]`, negative if one lies strictly inside.
    #[serde(with = "numfmt")]
    pub clearance: f64,
    pub pass: bool,
}

/// For `B ≥ 0` and `(a, b) ∩ σ(A) = ∅`, checks `(a + ‖B‖, b) ∩ σ(A + B) = ∅`.
pub fn interval_movement_check(
    a_op: &SymmetricMatrix,
    b_op: &SymmetricMatrix,
    a: f64,
    b: f64,
) -> Result<IntervalMovementReport> {
    same_size(a_op, b_op)?;
    let (b_min, b_max) = spectrum_bounds(b_op)?;
    let norm_b = b_min.abs().max(b_max.abs());
    if b_min < -ptol(norm_b) {
        return Err(Error::Precondition(format!("B is not non-negative: smallest eigenvalue {b_min:e}")));
    }
    let ev_a = eigenvalues(a_op)?;
    let scale = symmetric_norm(a_op)?.max(norm_b).max(f64::MIN_POSITIVE);
    let snap = 1e-12 * scale;
    if let Some(x) = ev_a.iter().find(|&&x| x > a + snap && x < b - snap) {
        return Err(Error::Precondition(format!("A has spectrum {x} inside ({a}, {b})")));
    }
    let ev = eigenvalues(&a_op.add(b_op)?)?;
    let lo = a + norm_b;
    let tol = MARGIN_TOL * scale;
    let offending: Vec<f64> = ev.iter().copied().filter(|&x| x > lo + tol && x < b - tol).collect();
    let clearance = ev
        .iter()
        .filter(|&&x| x >= lo && x <= b)
        .map(|&x| -((x - lo).min(b - x)))
        .fold(f64::INFINITY, f64::min);
    let clearance = if clearance == f64::INFINITY { clearance } else { clearance.min(0.0) };
    Ok(IntervalMovementReport { a, b, norm_b, pass: offending.is_empty(), offending, clearance })
}
