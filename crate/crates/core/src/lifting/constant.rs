//! The unique-continuation constant and the lifting constant, both obtained
//! by minimizing the exponent over a spectral shift `λ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt;
use crate::schrodinger::PotentialStats;

const GRID_POINTS: usize = 512;
const GOLDEN_TOL: f64 = 1e-10;

/// Optimized constant `sup_λ (δ/G)^{N·F(λ)}` together with its inputs.
///
/// `log_value` is authoritative; `value` underflows to zero once the exponent
/// passes about 745 / ln(G/δ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcpConstant {
    pub d: usize,
    pub g: f64,
    pub delta: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Extra `‖W‖_∞` added inside the potential term; zero for `C_uc`.
    pub w_sup: f64,
    pub energy: f64,
    pub n_dim: f64,
    pub lambda_star: f64,
    /// `F(λ*)`, the factor multiplying `N` in the exponent.
    pub exponent: f64,
    pub log_value: f64,
    pub value: f64,
}

/// `κ = ϑ · sup_λ (δ/G)^{N·F(λ)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub theta: f64,
    pub constant: UcpConstant,
    pub log_value: f64,
    #[serde(with = "numfmt")]
    pub value: f64,
}

fn validate(d: usize, g: f64, delta: f64, stats: &PotentialStats, energy: f64, n_dim: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter { name: "d", reason: "dimension must be positive".into() });
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter { name: "G", reason: format!("{g} is not a positive length") });
    }
    if !(delta > 0.0 && delta < 0.5 * g) {
        return Err(Error::InvalidParameter { name: "delta", reason: format!("{delta} not in (0, G/2) with G = {g}") });
    }
    if !(n_dim > 0.0 && n_dim.is_finite()) {
        return Err(Error::InvalidParameter { name: "N", reason: format!("{n_dim} is not positive") });
    }
    if !(stats.min.is_finite() && stats.max.is_finite() && stats.min <= stats.max) {
        return Err(Error::InvalidParameter { name: "potential", reason: "bounds must be finite with min ≤ max".into() });
    }
    if !energy.is_finite() {
        return Err(Error::InvalidParameter { name: "energy", reason: "must be finite".into() });
    }
    Ok(())
}

/// `F(λ) = 1 + G^{4/3}(‖V−λ‖_∞ + w)^{2/3} + G√((E−λ)₊)`
pub fn exponent_factor(g: f64, stats: &PotentialStats, w_sup: f64, energy: f64, lambda: f64) -> f64 {
    1.0 + g.powf(4.0 / 3.0) * (stats.deviation(lambda) + w_sup).powf(2.0 / 3.0) + g * (energy - lambda).max(0.0).sqrt()
}

/// Minimizer of `F` found by a bracketing grid and golden-section refinement.
/// The kinks of `F` (the potential midpoint and `E`) are tried explicitly
/// because the minimum frequently sits on one of them.
pub fn minimize_exponent(g: f64, stats: &PotentialStats, w_sup: f64, energy: f64) -> (f64, f64) {
    let f = |l: f64| exponent_factor(g, stats, w_sup, energy, l);
    let lo = stats.min - (energy - stats.min).max(0.0) - 1.0;
    let hi = energy.max(stats.max) + 1.0;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let xs: Vec<f64> = (0..GRID_POINTS).map(|i| lo + step * i as f64).collect();
    let (best_i, _) = xs
        .iter()
        .map(|&x| f(x))
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let (mut a, mut b) = (xs[best_i.saturating_sub(1)], xs[(best_i + 1).min(GRID_POINTS - 1)]);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > GOLDEN_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (stats.min + stats.max);
    let candidates = [xs[best_i], 0.5 * (a + b), mid, energy];
    candidates
        .iter()
        .map(|&l| (l, f(l)))
        .fold((f64::NAN, f64::INFINITY), |acc, (l, v)| if v < acc.1 { (l, v) } else { acc })
}

fn optimized(d: usize, g: f64, delta: f64, stats: &PotentialStats, w_sup: f64, energy: f64, n_dim: f64) -> Result<UcpConstant> {
    validate(d, g, delta, stats, energy, n_dim)?;
    if !(w_sup >= 0.0 && w_sup.is_finite()) {
        return Err(Error::InvalidParameter { name: "W_sup", reason: format!("{w_sup} is not a finite bound ≥ 0") });
    }
    let (lambda_star, exponent) = minimize_exponent(g, stats, w_sup, energy);
    let log_value = n_dim * exponent * (delta / g).ln();
    Ok(UcpConstant {
        d,
        g,
        delta,
        v_min: stats.min,
        v_max: stats.max,
        w_sup,
        energy,
        n_dim,
        lambda_star,
        exponent,
        log_value,
        value: log_value.exp(),
    })
}

/// `C_uc^{(G)} = sup_λ (δ/G)^{N(1 + G^{4/3}‖V−λ‖^{2/3} + G√((E−λ)₊))}`
pub fn c_uc(d: usize, g: f64, delta: f64, stats: &PotentialStats, energy: f64, n_dim: f64) -> Result<UcpConstant> {
    optimized(d, g, delta, stats, 0.0, energy, n_dim)
}

/// `κ(s)` with `‖V−λ‖_∞ + ‖W‖_∞` in the potential term.
#[allow(clippy::too_many_arguments)]
pub fn kappa_constant(
    d: usize,
    g: f64,
    delta: f64,
    theta: f64,
    stats: &PotentialStats,
    w_sup: f64,
    s: f64,
    n_dim: f64,
) -> Result<Kappa> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidParameter { name: "theta", reason: format!("{theta} is not positive") });
    }
    let constant = optimized(d, g, delta, stats, w_sup, s, n_dim)?;
    let log_value = theta.ln() + constant.log_value;
    Ok(Kappa { theta, constant, log_value, value: theta * constant.value })
}

#[allow(clippy::too_many_arguments)]
pub fn kappa(d: usize, g: f64, delta: f64, theta: f64, stats: &PotentialStats, w_sup: f64, s: f64, n_dim: f64) -> Result<f64> {
    Ok(kappa_constant(d, g, delta, theta, stats, w_sup, s, n_dim)?.value)
}

/// Smallest `N` for which `(δ/G)^{N·F} ≤ ratio`, i.e. the dimension constant
/// at which an observed mass fraction would become tight.
pub fn critical_n(ratio: f64, g: f64, delta: f64, factor: f64) -> f64 {
    if ratio >= 1.0 {
        return 0.0;
    }
    if ratio <= 0.0 {
        return f64::INFINITY;
    }
    ratio.ln() / ((delta / g).ln() * factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_case_closed_form() {
        // F(λ) = 1 + |λ|^{2/3} + √((−λ)₊) is minimized at 0, so the value is δ^N
        let c = c_uc(1, 1.0, 0.25, &PotentialStats::constant(0.0), 0.0, 2.0).unwrap();
        assert_eq!(c.lambda_star, 0.0);
        assert!((c.value - 0.0625).abs() < 1e-15);
        assert!(c.value <= 1.0);
    }

    #[test]
    fn kappa_closed_form() {
        // exponent 2(1 + 1^{2/3}) = 4 at λ = 0
        let k = kappa(1, 1.0, 0.25, 1.0, &PotentialStats::constant(0.0), 1.0, 0.0, 2.0).unwrap();
        assert!((k - 0.25f64.powi(4)).abs() < 1e-15);
        let k2 = kappa(1, 1.0, 0.25, 2.0, &PotentialStats::constant(0.0), 1.0, 0.0, 2.0).unwrap();
        assert!((k2 - 2.0 * k).abs() < 1e-16);
    }

    #[test]
    fn near_half_cell_tends_to_half_power() {
        let c = c_uc(1, 1.0, 0.4999999, &PotentialStats::constant(0.0), -1.0, 3.0).unwrap();
        assert!((c.value - 0.125).abs() < 1e-5);
    }

    #[test]
    fn shift_invariance() {
        let s = PotentialStats { min: -2.0, max: 5.0, sup: 5.0 };
        let base = c_uc(1, 1.0, 0.1, &s, 7.0, 10.0).unwrap();
        for c in [-3.5, 0.25, 11.0] {
            let moved = c_uc(1, 1.0, 0.1, &s.shifted(c), 7.0 + c, 10.0).unwrap();
            assert!((moved.log_value - base.log_value).abs() <= 1e-12 * base.log_value.abs());
        }
    }

    #[test]
    fn grid_optimum_is_not_beaten_by_dense_scan() {
        let s = PotentialStats { min: -1.0, max: 3.0, sup: 3.0 };
        let (_, best) = minimize_exponent(2.0, &s, 0.5, 4.0);
        for i in 0..20001 {
            let l = -6.0 + 12.0 * i as f64 / 20000.0;
            assert!(exponent_factor(2.0, &s, 0.5, 4.0, l) >= best - 1e-12);
        }
    }

    #[test]
    fn rejects_bad_delta() {
        let s = PotentialStats::constant(0.0);
        assert!(c_uc(1, 1.0, 0.5, &s, 0.0, 1.0).is_err());
        assert!(c_uc(1, 1.0, 0.0, &s, 0.0, 1.0).is_err());
        assert!(kappa(1, 1.0, 0.2, 0.0, &s, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn critical_n_reproduces_ratio() {
        let n = critical_n(0.01, 1.0, 0.1, 2.0);
        assert!(((0.1f64).powf(n * 2.0) - 0.01).abs() < 1e-15);
        assert_eq!(critical_n(1.0, 1.0, 0.1, 2.0), 0.0);
    }
}
