//! Functional calculus with the profile `s_t(λ)` and the ghost-dimension
//! extension `Ψ(t) = Σ c_k s_t(λ_k) v_k` of a spectral-subspace vector.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SpectralDecomposition, SymmetricMatrix};
use crate::schrodinger::{Boundary, Grid, PotentialField};

pub const DEFAULT_TIME_SAMPLES: usize = 129;

const TAYLOR_CUTOFF: f64 = 1e-4;

/// `sinh(√λ t)/√λ` for `λ > 0`, `t` for `λ = 0`, `sin(√−λ t)/√−λ` for `λ < 0`.
pub fn s_eval(t: f64, lambda: f64) -> f64 {
    let x = lambda * t * t;
    if x.abs() < TAYLOR_CUTOFF {
        return t * (1.0 + x / 6.0 + x * x / 120.0);
    }
    if lambda > 0.0 {
        let r = lambda.sqrt();
        (r * t).sinh() / r
    } else {
        let r = (-lambda).sqrt();
        (r * t).sin() / r
    }
}

/// `∂_t s_t(λ)`
pub fn s_dt(t: f64, lambda: f64) -> f64 {
    let x = lambda * t * t;
    if x.abs() < TAYLOR_CUTOFF {
        return 1.0 + x / 2.0 + x * x / 24.0;
    }
    if lambda > 0.0 {
        (lambda.sqrt() * t).cosh()
    } else {
        ((-lambda).sqrt() * t).cos()
    }
}

/// Per-mode time profile used to build an extension. Only [`Profile::Ghost`]
/// is the correct one; the others exist as negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Ghost,
    /// `cosh(√λ t)/√λ` (and `cos` below zero); solves the same ODE but is even.
    Cosh,
    /// Branches exchanged: `sin` above zero, `sinh` below.
    SwappedBranch,
}

impl Profile {
    fn value(self, t: f64, lambda: f64) -> f64 {
        match self {
            Profile::Ghost => s_eval(t, lambda),
            Profile::SwappedBranch => s_eval(t, -lambda),
            Profile::Cosh => {
                if lambda.abs() < 1e-300 {
                    1.0
                } else if lambda > 0.0 {
                    (lambda.sqrt() * t).cosh() / lambda.sqrt()
                } else {
                    ((-lambda).sqrt() * t).cos() / (-lambda).sqrt()
                }
            }
        }
    }

    fn derivative(self, t: f64, lambda: f64) -> f64 {
        match self {
            Profile::Ghost => s_dt(t, lambda),
            Profile::SwappedBranch => s_dt(t, -lambda),
            Profile::Cosh => {
                if lambda > 0.0 {
                    (lambda.sqrt() * t).sinh()
                } else {
                    -((-lambda).sqrt() * t).sin()
                }
            }
        }
    }
}

/// Time samples of `Ψ` on a uniform grid over `[−T, T]`, together with the
/// spectral data that generate it.
#[derive(Clone, Debug)]
pub struct GhostExtension {
    psi: Vec<f64>,
    times: Vec<f64>,
    samples: Vec<Vec<f64>>,
    lambdas: Vec<f64>,
    coeffs: Vec<f64>,
    basis: DMatrix<f64>,
    window: (f64, f64),
    profile: Profile,
}

/// Builds `Ψ` for `ψ ∈ Ran P_H([a, b])` on `m` samples of `[−T, T]`.
pub fn extend(psi: &[f64], dec: &SpectralDecomposition, window: (f64, f64), t_max: f64, m: usize) -> Result<GhostExtension> {
    extend_with_profile(psi, dec, window, t_max, m, Profile::Ghost)
}

pub fn extend_with_profile(
    psi: &[f64],
    dec: &SpectralDecomposition,
    window: (f64, f64),
    t_max: f64,
    m: usize,
    profile: Profile,
) -> Result<GhostExtension> {
    let n = dec.n();
    if psi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: psi.len() });
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidParameter { name: "T", reason: format!("{t_max} must be positive") });
    }
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::InvalidParameter { name: "m", reason: format!("{m} must be odd and at least 3") });
    }
    let (a, b) = window;
    if !(a <= b) {
        return Err(Error::InvalidParameter { name: "window", reason: format!("[{a}, {b}] is empty") });
    }
    let snap = 1e-12 * dec.norm();
    let cols: Vec<usize> = (0..n).filter(|&k| dec.eigenvalue(k) >= a - snap && dec.eigenvalue(k) <= b + snap).collect();
    let mut basis = DMatrix::zeros(n, cols.len());
    for (j, &k) in cols.iter().enumerate() {
        basis.column_mut(j).copy_from(&dec.eigenvectors().column(k));
    }
    let p = DVector::from_column_slice(psi);
    let c = basis.transpose() * &p;
    let residual = (&p - &basis * &c).norm();
    let pnorm = p.norm();
    if residual > 1e-10 * pnorm.max(f64::MIN_POSITIVE) && residual > 0.0 {
        return Err(Error::OutsideWindow { residual: residual / pnorm.max(f64::MIN_POSITIVE) });
    }
    let lambdas: Vec<f64> = cols.iter().map(|&k| dec.eigenvalue(k)).collect();
    let coeffs: Vec<f64> = c.iter().copied().collect();
    let mut ext = GhostExtension {
        psi: psi.to_vec(),
        times: Vec::new(),
        samples: Vec::new(),
        lambdas,
        coeffs,
        basis,
        window,
        profile,
    };
    let half = m / 2;
    let dt = t_max / half as f64;
    ext.times = (0..m).map(|i| (i as f64 - half as f64) * dt).collect();
    ext.times[half] = 0.0;
    ext.times[0] = -t_max;
    ext.times[m - 1] = t_max;
    let mut samples = vec![Vec::new(); m];
    if profile == Profile::Ghost {
        // compute t ≥ 0 and mirror, so oddness and Ψ(0) = 0 hold exactly
        for i in half..m {
            samples[i] = ext.eval(ext.times[i]);
        }
        for i in 0..half {
            samples[i] = samples[m - 1 - i].iter().map(|v| -v).collect();
        }
        samples[half] = vec![0.0; n];
    } else {
        for (i, s) in samples.iter_mut().enumerate() {
            *s = ext.eval(ext.times[i]);
        }
    }
    ext.samples = samples;
    Ok(ext)
}

impl GhostExtension {
    fn combine(&self, weights: impl Fn(f64) -> f64) -> Vec<f64> {
        let w = DVector::from_iterator(self.coeffs.len(), self.coeffs.iter().zip(&self.lambdas).map(|(c, &l)| c * weights(l)));
        (&self.basis * w).iter().copied().collect()
    }

    /// `Ψ(t)` evaluated from the spectral data.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let p = self.profile;
        self.combine(|l| p.value(t, l))
    }

    /// `∂_t Ψ(t)`
    pub fn eval_dt(&self, t: f64) -> Vec<f64> {
        let p = self.profile;
        self.combine(|l| p.derivative(t, l))
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn t_max(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn step(&self) -> f64 {
        self.t_max() / (self.times.len() / 2) as f64
    }

    /// `max_i ‖Ψ(t_i) + Ψ(−t_i)‖_∞`
    pub fn oddness_defect(&self) -> f64 {
        let m = self.samples.len();
        (0..m / 2)
            .flat_map(|i| self.samples[i].iter().zip(&self.samples[m - 1 - i]).map(|(a, b)| (a + b).abs()))
            .fold(0.0, f64::max)
    }

    /// `‖Ψ(0)‖_∞`
    pub fn initial_value(&self) -> f64 {
        self.samples[self.samples.len() / 2].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖(Ψ(Δt) − Ψ(−Δt))/(2Δt) − ψ‖`
    pub fn derivative_defect(&self) -> f64 {
        let mid = self.samples.len() / 2;
        let dt = self.step();
        self.samples[mid + 1]
            .iter()
            .zip(&self.samples[mid - 1])
            .zip(&self.psi)
            .map(|((p, q), s)| {
                let d = (p - q) / (2.0 * dt) - s;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// `max_i ‖H Ψ(t_i) − D_t² Ψ(t_i)‖` over interior samples, with `D_t²` the
/// centered second difference.
pub fn ghost_residual(ext: &GhostExtension, h: &SymmetricMatrix) -> Result<f64> {
    Ok(residual_profile(ext, h)?.iter().map(|p| p.1).fold(0.0, f64::max))
}

/// `(t_i, ‖H Ψ(t_i) − D_t² Ψ(t_i)‖)` for every interior sample.
pub fn residual_profile(ext: &GhostExtension, h: &SymmetricMatrix) -> Result<Vec<(f64, f64)>> {
    let m = ext.samples.len();
    if m < 3 {
        return Err(Error::InvalidParameter { name: "m", reason: "need at least 3 time samples".into() });
    }
    if h.n() != ext.psi.len() {
        return Err(Error::DimensionMismatch { expected: ext.psi.len(), found: h.n() });
    }
    let dt2 = ext.step() * ext.step();
    let mut out = Vec::with_capacity(m - 2);
    for i in 1..m - 1 {
        let hp = h.matvec(&ext.samples[i]);
        let r: f64 = (0..hp.len())
            .map(|k| {
                let d2 = (ext.samples[i + 1][k] - 2.0 * ext.samples[i][k] + ext.samples[i - 1][k]) / dt2;
                (hp[k] - d2) * (hp[k] - d2)
            })
            .sum::<f64>()
            .sqrt();
        out.push((ext.times[i], r));
    }
    Ok(out)
}

/// Observed convergence order of the residual under halving of `Δt`,
/// measured at the sample times the coarse and fine grids share.
pub fn residual_order(coarse: &GhostExtension, fine: &GhostExtension, h: &SymmetricMatrix) -> Result<f64> {
    let rc = residual_profile(coarse, h)?;
    let rf = residual_profile(fine, h)?;
    let mut worst = f64::INFINITY;
    for &(t, r) in &rc {
        if t <= 0.0 {
            continue;
        }
        if let Some(&(_, r2)) = rf.iter().find(|(tf, _)| (tf - t).abs() <= 1e-12 * t.abs().max(1.0)) {
            if r > 0.0 && r2 > 0.0 {
                worst = worst.min((r / r2).log2());
            }
        }
    }
    if worst.is_infinite() {
        return Err(Error::GridMismatch("time grids share no interior sample".into()));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub tau: f64,
    pub energy: f64,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub pass: bool,
}

impl SandwichReport {
    /// `min(value − lower, upper − value)` relative to `upper`.
    pub fn relative_margin(&self) -> f64 {
        let scale = self.upper.abs().max(f64::MIN_POSITIVE);
        (self.value - self.lower).min(self.upper - self.value) / scale
    }
}

const SANDWICH_INTERVALS: usize = 512;
const SANDWICH_SLACK: f64 = 1e-6;

/// Discrete `‖Ψ‖²_{H¹(Λ × (−τ, τ))}` against `(τ/2)‖ψ‖²` and
/// `2τ(1 + (1 + ‖V‖_∞)τ²) e^{2τ√max(0,E)} ‖ψ‖²`.
///
/// The time integral uses composite Simpson with exact time derivatives; the
/// gradient term is the quadratic form of `H − V`.
pub fn sandwich_check(ext: &GhostExtension, h: &SymmetricMatrix, v: &PotentialField, e: f64, tau: f64) -> Result<SandwichReport> {
    if !(tau > 0.0 && tau <= ext.t_max() * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter { name: "tau", reason: format!("{tau} not in (0, T = {}]", ext.t_max()) });
    }
    if h.n() != ext.psi.len() || v.len() != ext.psi.len() {
        return Err(Error::DimensionMismatch { expected: ext.psi.len(), found: h.n() });
    }
    let top = ext.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top > e + 1e-12 * h.max_abs().max(1.0) {
        return Err(Error::Precondition(format!("ψ has spectral content at {top} > E = {e}")));
    }
    let kinetic = h.sub(&v.as_operator())?;
    let integrand = |t: f64| {
        let p = ext.eval(t);
        let dp = ext.eval_dt(t);
        let mass: f64 = p.iter().map(|x| x * x).sum();
        let dmass: f64 = dp.iter().map(|x| x * x).sum();
        dmass + kinetic.quadratic_form(&p) + mass
    };
    // even integrand: ∫_{−τ}^{τ} = 2∫_0^τ
    let q = SANDWICH_INTERVALS;
    let dt = tau / q as f64;
    let mut acc = integrand(0.0) + integrand(tau);
    for i in 1..q {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(i as f64 * dt);
    }
    let value = 2.0 * acc * dt / 3.0;
    let norm2: f64 = ext.psi.iter().map(|x| x * x).sum();
    let lower = 0.5 * tau * norm2;
    let vsup = v.stats().sup;
    let upper = 2.0 * tau * (1.0 + (1.0 + vsup) * tau * tau) * (2.0 * tau * e.max(0.0).sqrt()).exp() * norm2;
    let slack = SANDWICH_SLACK * upper.abs();
    let pass = lower <= value + slack && value <= upper + slack;
    Ok(SandwichReport { tau, energy: e, lower, value, upper, pass })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub time: f64,
    /// Residual of `H̃Ψ̃ − ∂_t²Ψ̃` at the seam node and its two neighbours.
    pub seam_residual: f64,
    /// Residual over the whole doubled interval.
    pub max_residual: f64,
    /// `max |Ψ(t, x)|` for scale.
    pub scale: f64,
}

/// Antisymmetric reflection of a 1D Dirichlet extension across the right
/// endpoint. The potential is reflected evenly; the reflected `Ψ̃` must still
/// satisfy `H̃Ψ̃ = ∂_t²Ψ̃` on the doubled interval, seam included.
pub fn reflection_demo(ext: &GhostExtension, grid: &Grid, v: &PotentialField, t: f64) -> Result<ReflectionReport> {
    if grid.dim() != 1 || grid.boundary() != Boundary::Dirichlet {
        return Err(Error::InvalidParameter { name: "grid", reason: "reflection demo needs a 1D Dirichlet grid".into() });
    }
    grid.check_len(ext.psi.len())?;
    grid.check_len(v.len())?;
    let n = grid.len();
    let p = ext.eval(t);
    let d2p = {
        let prof = ext.profile;
        ext.combine(|l| l * prof.value(t, l))
    };
    // doubled interior: n nodes, seam node (value 0), n mirrored nodes
    let big = 2 * n + 1;
    let mut u = vec![0.0; big];
    let mut d2 = vec![0.0; big];
    let mut pot = vec![0.0; big];
    for i in 0..n {
        u[i] = p[i];
        u[big - 1 - i] = -p[i];
        d2[i] = d2p[i];
        d2[big - 1 - i] = -d2p[i];
        pot[i] = v.values()[i];
        pot[big - 1 - i] = v.values()[i];
    }
    pot[n] = v.values()[n - 1];
    let h2 = grid.h() * grid.h();
    let mut seam = 0.0f64;
    let mut worst = 0.0f64;
    for i in 0..big {
        let left = if i > 0 { u[i - 1] } else { 0.0 };
        let right = if i + 1 < big { u[i + 1] } else { 0.0 };
        let hu = (2.0 * u[i] - left - right) / h2 + pot[i] * u[i];
        let r = (hu - d2[i]).abs();
        worst = worst.max(r);
        if i + 1 >= n && i <= n + 1 {
            seam = seam.max(r);
        }
    }
    let scale = p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(ReflectionReport { time: t, seam_residual: seam, max_residual: worst, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigendecompose;
    use crate::schrodinger::{build_hamiltonian, AdmissibleDomain};

    #[test]
    fn s_eval_examples() {
        assert_eq!(s_eval(2.0, 0.0), 2.0);
        assert!((s_eval(1.0, 4.0) - 2f64.sinh() / 2.0).abs() < 1e-15);
        assert!((s_eval(1.0, 4.0) - 1.8134302).abs() < 1e-7);
        assert!(s_eval(1.0, -std::f64::consts::PI.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn s_eval_continuous_at_branch_point() {
        for &t in &[0.5, 1.0, 3.0] {
            for &eps in &[1e-6, 1e-8] {
                assert!((s_eval(t, eps) - s_eval(t, -eps)).abs() <= eps * t * t * t + 1e-15);
            }
        }
    }

    #[test]
    fn taylor_branch_matches_closed_form_at_cutoff() {
        let t = 1.0;
        let lam: f64 = 0.99e-4;
        let closed = (lam.sqrt() * t).sinh() / lam.sqrt();
        assert!((s_eval(t, lam) - closed).abs() < 1e-15);
        let closed_dt = (lam.sqrt() * t).cosh();
        assert!((s_dt(t, lam) - closed_dt).abs() < 4e-15);
    }

    #[test]
    fn wronskian_identity() {
        for &t in &[-2.0, -0.3, 0.0, 0.7, 1.5] {
            for &l in &[-30.0, -1.0, -1e-6, 0.0, 1e-7, 2.0, 9.0] {
                let s = s_eval(t, l);
                let ds = s_dt(t, l);
                assert!((ds * ds - l * s * s - 1.0).abs() < 1e-10, "t={t} l={l}");
            }
        }
    }

    fn small_problem() -> (Grid, PotentialField, SymmetricMatrix, SpectralDecomposition) {
        let dom = AdmissibleDomain::new(&[0.0], &[1.0], 1.0).unwrap();
        let grid = Grid::with_resolution(&dom, 32, Boundary::Dirichlet).unwrap();
        let v = PotentialField::cosine(&grid, 3.0, 1.0, 0.2).unwrap();
        let h = build_hamiltonian(&dom, &grid, &v).unwrap();
        let dec = eigendecompose(&h).unwrap();
        (grid, v, h, dec)
    }

    #[test]
    fn single_mode_is_exact() {
        let (_, _, _, dec) = small_problem();
        let v = dec.eigenvector(1);
        let lam = dec.eigenvalue(1);
        let ext = extend(&v, &dec, (lam - 1.0, lam + 1.0), 0.2, 21).unwrap();
        for (t, s) in ext.times().iter().zip(ext.samples()) {
            let f = s_eval(*t, lam);
            for (a, b) in s.iter().zip(&v) {
                assert!((a - f * b).abs() < 1e-13);
            }
        }
        assert_eq!(ext.initial_value(), 0.0);
        assert_eq!(ext.oddness_defect(), 0.0);
    }

    #[test]
    fn rejects_content_outside_window() {
        let (_, _, _, dec) = small_problem();
        let mut psi = dec.eigenvector(0);
        psi.iter_mut().zip(dec.eigenvector(5)).for_each(|(a, b)| *a += 1e-3 * b);
        let l0 = dec.eigenvalue(0);
        assert!(matches!(extend(&psi, &dec, (l0 - 1.0, l0 + 1.0), 0.1, 11), Err(Error::OutsideWindow { .. })));
        assert!(extend(&psi, &dec, (l0, dec.eigenvalue(5)), 0.1, 11).is_ok());
        assert!(extend(&psi, &dec, (l0, dec.eigenvalue(5)), 0.1, 10).is_err());
    }

    #[test]
    fn residual_converges_at_second_order() {
        let (_, _, h, dec) = small_problem();
        let psi: Vec<f64> = (0..dec.n()).map(|i| dec.eigenvector(0)[i] + 0.5 * dec.eigenvector(2)[i]).collect();
        let w = (dec.eigenvalue(0) - 1.0, dec.eigenvalue(2) + 1.0);
        let coarse = extend(&psi, &dec, w, 0.5, 33).unwrap();
        let fine = extend(&psi, &dec, w, 0.5, 65).unwrap();
        let order = residual_order(&coarse, &fine, &h).unwrap();
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn negative_controls() {
        let (_, _, h, dec) = small_problem();
        let psi = dec.eigenvector(0);
        let w = (dec.eigenvalue(0) - 1.0, dec.eigenvalue(0) + 1.0);
        let good = ghost_residual(&extend(&psi, &dec, w, 0.5, 65).unwrap(), &h).unwrap();
        let swapped = extend_with_profile(&psi, &dec, w, 0.5, 65, Profile::SwappedBranch).unwrap();
        let bad = ghost_residual(&swapped, &h).unwrap();
        assert!(bad > 1.0 && bad > 1e3 * good);
        let cosh = extend_with_profile(&psi, &dec, w, 0.5, 65, Profile::Cosh).unwrap();
        assert!(cosh.initial_value() > 0.01);
        assert!(cosh.oddness_defect() > 0.01);
    }

    #[test]
    fn sandwich_holds_for_ground_state() {
        let (_, v, h, dec) = small_problem();
        let psi = dec.eigenvector(0);
        let e = dec.eigenvalue(0);
        let ext = extend(&psi, &dec, (e - 1.0, e), 0.5, 33).unwrap();
        let rep = sandwich_check(&ext, &h, &v, e, 0.25).unwrap();
        assert!(rep.pass && rep.lower < rep.value && rep.value < rep.upper);
        assert!(sandwich_check(&ext, &h, &v, e, 0.6).is_err());
        assert!(sandwich_check(&ext, &h, &v, e, 0.0).is_err());
    }

    #[test]
    fn sandwich_of_zero_vector() {
        let (_, v, h, dec) = small_problem();
        let ext = extend(&vec![0.0; dec.n()], &dec, (0.0, 100.0), 0.5, 11).unwrap();
        let rep = sandwich_check(&ext, &h, &v, 100.0, 0.5).unwrap();
        assert_eq!((rep.lower, rep.value, rep.upper), (0.0, 0.0, 0.0));
        assert!(rep.pass);
    }

    #[test]
    fn reflection_preserves_equation() {
        let (grid, v, _, dec) = small_problem();
        let psi: Vec<f64> = (0..dec.n()).map(|i| dec.eigenvector(0)[i] - 0.3 * dec.eigenvector(1)[i]).collect();
        let ext = extend(&psi, &dec, (dec.eigenvalue(0), dec.eigenvalue(1)), 1.0, 11).unwrap();
        let rep = reflection_demo(&ext, &grid, &v, 0.7).unwrap();
        let tol = 1e-10 * rep.scale * (dec.norm() + 1.0);
        assert!(rep.seam_residual < tol && rep.max_residual < tol, "{rep:?}");
    }
}
