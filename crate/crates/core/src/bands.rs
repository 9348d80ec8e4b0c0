//! Floquet–Bloch bands of one-dimensional periodic Schrödinger operators,
//! the Hill discriminant as an independent oracle, and edge tracking under a
//! coupling `H + tW`.

use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{fold_ring, HermitianBand, HermitianMatrix};
use crate::numfmt;
use crate::schrodinger::PotentialStats;

/// Absolute bisection tolerance for band energies.
pub const BAND_ATOL: f64 = 1e-12;
/// Absolute slack allowed in the per-step edge sandwich.
pub const EDGE_SLACK: f64 = 1e-9;

/// Potential sampled at `x_j = j·L/n`, `j = 0..n`, on one period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPotential {
    period: f64,
    values: Vec<f64>,
}

impl CellPotential {
    pub fn new(period: f64, values: Vec<f64>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter { name: "period", reason: format!("{period} is not positive") });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter { name: "potential", reason: "non-finite value".into() });
        }
        Ok(Self { period, values })
    }

    pub fn from_fn(period: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = period / n as f64;
        Self::new(period, (0..n).map(|j| f(j as f64 * h)).collect())
    }

    pub fn constant(period: f64, n: usize, c: f64) -> Result<Self> {
        Self::new(period, vec![c; n])
    }

    /// `amplitude · cos(2πx/L)`
    pub fn cosine(period: f64, n: usize, amplitude: f64) -> Result<Self> {
        Self::from_fn(period, n, |x| amplitude * (2.0 * std::f64::consts::PI * x / period).cos())
    }

    /// `amplitude · sin(2πx/L)`, sign-changing.
    pub fn sine(period: f64, n: usize, amplitude: f64) -> Result<Self> {
        Self::from_fn(period, n, |x| amplitude * (2.0 * std::f64::consts::PI * x / period).sin())
    }

    /// `value · 1_B` for the periodic ball `B = {|x − center| < radius}`.
    /// Nodes exactly on the sphere get half the value, matching the trapezoid
    /// rule.
    pub fn ball_indicator(period: f64, n: usize, center: f64, radius: f64, value: f64) -> Result<Self> {
        if !(radius > 0.0 && 2.0 * radius <= period) {
            return Err(Error::InvalidParameter { name: "radius", reason: format!("{radius} not in (0, L/2]") });
        }
        let h = period / n as f64;
        Self::from_fn(period, n, |x| {
            let d = (x - center).rem_euclid(period);
            let d = d.min(period - d);
            if (d - radius).abs() <= 1e-9 * h {
                0.5 * value
            } else if d < radius {
                value
            } else {
                0.0
            }
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.period / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn stats(&self) -> PotentialStats {
        PotentialStats::of(&self.values)
    }

    /// `self + t · other`
    pub fn coupled(&self, other: &CellPotential, t: f64) -> Result<Self> {
        if other.len() != self.len() || other.period != self.period {
            return Err(Error::GridMismatch(format!("cell of {} nodes vs {}", self.len(), other.len())));
        }
        Self::new(self.period, self.values.iter().zip(&other.values).map(|(a, b)| a + t * b).collect())
    }
}

/// Coefficients of the five-point fourth-order stencil for `−u''`.
fn stencil(h: f64) -> [f64; 3] {
    let s = 1.0 / (12.0 * h * h);
    [30.0 * s, -16.0 * s, s]
}

fn check_resolution(v: &CellPotential, bands: usize) -> Result<()> {
    let need = 16usize.max(4 * bands);
    if v.len() < need {
        return Err(Error::CoarseResolution(format!("{} cell nodes, need at least {need}", v.len())));
    }
    Ok(())
}

/// Dense Hermitian fiber matrix with twisted boundary condition
/// `u(x + L) = e^{iθ} u(x)`.
pub fn fiber_matrix(v: &CellPotential, theta: f64) -> Result<HermitianMatrix> {
    check_resolution(v, 1)?;
    let n = v.len();
    let c = stencil(v.h());
    let mut m = HermitianMatrix::zeros(n);
    let phase = Complex64::from_polar(1.0, theta);
    for i in 0..n {
        m.set(i, i, Complex64::new(c[0] + v.values[i], 0.0));
    }
    for i in 0..n {
        for s in 1..=2 {
            let (j, z) = if i + s < n { (i + s, Complex64::new(c[s], 0.0)) } else { (i + s - n, c[s] * phase) };
            let cur = m.get(i, j);
            m.set(i, j, cur + z);
        }
    }
    Ok(m)
}

fn fiber_band(v: &CellPotential, theta: f64, pos: &[usize]) -> HermitianBand {
    let n = v.len();
    let c = stencil(v.h());
    let phase = Complex64::from_polar(1.0, theta);
    let mut band = HermitianBand::zeros(n, 4);
    for i in 0..n {
        band.set(pos[i], pos[i], Complex64::new(c[0] + v.values[i], 0.0));
    }
    for i in 0..n {
        for s in 1..=2 {
            let (j, z) = if i + s < n { (i + s, Complex64::new(c[s], 0.0)) } else { (i + s - n, c[s] * phase) };
            band.add(pos[i], pos[j], z);
        }
    }
    band
}

/// Eigenvalues of one fiber.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochFiber {
    pub theta: f64,
    pub eigenvalues: Vec<f64>,
}

/// Lowest `count` eigenvalues of the fiber at `θ`.
pub fn bloch_fiber(v: &CellPotential, theta: f64, count: usize) -> Result<BlochFiber> {
    check_resolution(v, count)?;
    let pos = fold_ring(v.len());
    let band = fiber_band(v, theta, &pos);
    Ok(BlochFiber { theta, eigenvalues: band.lowest_eigenvalues_below(count, BAND_ATOL, hint(v, theta, count)) })
}

/// Upper estimate for the `count` lowest fiber eigenvalues: the free value
/// plus `max V` plus a margin for the stencil.
fn hint(v: &CellPotential, theta: f64, count: usize) -> f64 {
    let k = (theta.abs() + 2.0 * std::f64::consts::PI * count as f64) / v.period;
    let vmax = v.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    2.0 * k * k + vmax + 1.0
}

/// Band functions `E_n(θ)` on a uniform grid of `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandFunctions {
    pub thetas: Vec<f64>,
    /// `energies[n][j] = E_{n+1}(θ_j)`
    pub energies: Vec<Vec<f64>>,
    /// `[min_θ E_n, max_θ E_n]` per band.
    pub intervals: Vec<(f64, f64)>,
    /// Open gaps `(max E_n, min E_{n+1})` with the lower band index `n`.
    pub gaps: Vec<(usize, f64, f64)>,
    /// Grid index where each band attains its minimum and maximum.
    pub argmin: Vec<usize>,
    pub argmax: Vec<usize>,
}

impl BandFunctions {
    pub fn band_count(&self) -> usize {
        self.energies.len()
    }

    /// Gap above band `n` (1-based), if open.
    pub fn gap_above(&self, n: usize) -> Option<(f64, f64)> {
        self.gaps.iter().find(|g| g.0 == n).map(|g| (g.1, g.2))
    }

    /// All band intervals as a numerical realization of the essential spectrum.
    pub fn spectrum(&self) -> &[(f64, f64)] {
        &self.intervals
    }
}

/// Bands from the twisted-boundary fibers. `theta_count` must be even and at
/// least 16 so that `0` and `π` are grid points; fibers with `θ > π` are
/// mirrored from `2π − θ`.
pub fn compute_bands(v: &CellPotential, theta_count: usize, band_count: usize) -> Result<BandFunctions> {
    if theta_count < 16 || !theta_count.is_multiple_of(2) {
        return Err(Error::InvalidParameter { name: "theta_count", reason: format!("{theta_count} must be even and ≥ 16") });
    }
    if band_count == 0 {
        return Err(Error::InvalidParameter { name: "bands", reason: "need at least one band".into() });
    }
    check_resolution(v, band_count)?;
    let pos = fold_ring(v.len());
    let half = theta_count / 2;
    let thetas: Vec<f64> = (0..theta_count).map(|j| 2.0 * std::f64::consts::PI * j as f64 / theta_count as f64).collect();
    let computed: Vec<Vec<f64>> = (0..=half)
        .into_par_iter()
        .map(|j| {
            let t = thetas.get(j).copied().unwrap_or(std::f64::consts::PI);
            let t = if j == half { std::f64::consts::PI } else { t };
            fiber_band(v, t, &pos).lowest_eigenvalues_below(band_count, BAND_ATOL, hint(v, t, band_count))
        })
        .collect();
    let mut energies = vec![vec![0.0; theta_count]; band_count];
    for j in 0..theta_count {
        let src = if j <= half { j } else { theta_count - j };
        for (n, row) in energies.iter_mut().enumerate() {
            row[j] = computed[src][n];
        }
    }
    // Bands that touch at θ = 0 or π come out of the eigensolver split by
    // rounding of order ε‖fiber‖; such slivers are not open gaps.
    let closure = 100.0 * f64::EPSILON * (16.0 / (3.0 * v.h() * v.h()) + v.stats().sup);
    Ok(assemble(thetas, energies, closure))
}

fn assemble(thetas: Vec<f64>, energies: Vec<Vec<f64>>, closure: f64) -> BandFunctions {
    let mut intervals = Vec::new();
    let mut argmin = Vec::new();
    let mut argmax = Vec::new();
    for row in &energies {
        let (imin, lo) = row.iter().copied().enumerate().fold((0, f64::INFINITY), |a, (i, x)| if x < a.1 { (i, x) } else { a });
        let (imax, hi) =
            row.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, x)| if x > a.1 { (i, x) } else { a });
        intervals.push((lo, hi));
        argmin.push(imin);
        argmax.push(imax);
    }
    let gaps = intervals.windows(2).enumerate().filter(|(_, w)| w[1].0 - w[0].1 > closure).map(|(n, w)| (n + 1, w[0].1, w[1].0)).collect();
    BandFunctions { thetas, energies, intervals, gaps, argmin, argmax }
}

/// Hill discriminant `D(E) = u₁(L) + u₂'(L)` of `−u'' + Vu = Eu`, integrated
/// by classical RK4 with step `2h` so that every stage uses a sample of `V`.
pub fn discriminant(v: &CellPotential, energy: f64) -> Result<f64> {
    let n = v.len();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::CoarseResolution(format!("discriminant needs an even sample count ≥ 4, got {n}")));
    }
    let dt = 2.0 * v.h();
    let q = |j: usize| v.values[j % n] - energy;
    // y = (u₁, u₁', u₂, u₂')
    let mut y = [1.0, 0.0, 0.0, 1.0];
    let f = |qv: f64, s: &[f64; 4]| [s[1], qv * s[0], s[3], qv * s[2]];
    for step in 0..n / 2 {
        let (q0, q1, q2) = (q(2 * step), q(2 * step + 1), q(2 * step + 2));
        let k1 = f(q0, &y);
        let k2 = f(q1, &add(&y, &k1, 0.5 * dt));
        let k3 = f(q1, &add(&y, &k2, 0.5 * dt));
        let k4 = f(q2, &add(&y, &k3, dt));
        for i in 0..4 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(y[0] + y[3])
}

fn add(y: &[f64; 4], k: &[f64; 4], s: f64) -> [f64; 4] {
    [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]]
}

/// Root of `D(E) = target` (`±2`) near `guess`, found by expanding a bracket
/// until the sign changes and then bisecting. `None` if no sign change is
/// found within `max_width` (touching roots of closed gaps).
pub fn discriminant_root(v: &CellPotential, target: f64, guess: f64, max_width: f64) -> Result<Option<f64>> {
    let g = |e: f64| discriminant(v, e).map(|d| d - target);
    let mut w = 1e-6 * guess.abs().max(1.0);
    let f0 = g(guess)?;
    if f0 == 0.0 {
        return Ok(Some(guess));
    }
    while w <= max_width {
        for (lo, hi) in [(guess - w, guess), (guess, guess + w)] {
            let (flo, fhi) = (g(lo)?, g(hi)?);
            if flo * fhi <= 0.0 {
                return Ok(Some(bisect_root(&g, lo, hi, flo)?));
            }
        }
        w *= 2.0;
    }
    Ok(None)
}

fn bisect_root(g: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    while hi - lo > 1e-13 * lo.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = g(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Band edge next to a gap, compared against the discriminant root.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCheck {
    pub band: usize,
    pub upper: bool,
    pub theta: f64,
    pub band_edge: f64,
    #[serde(with = "numfmt")]
    pub discriminant_root: f64,
    #[serde(with = "numfmt")]
    pub difference: f64,
}

/// Cross-checks both edges of every open gap. The edge at `θ = 0` solves
/// `D = 2`, the one at `θ = π` solves `D = −2`.
pub fn cross_check_edges(v: &CellPotential, bands: &BandFunctions) -> Result<Vec<EdgeCheck>> {
    let mut out = Vec::new();
    for &(n, lo, hi) in &bands.gaps {
        for (band, upper, value, idx) in [(n, true, lo, bands.argmax[n - 1]), (n + 1, false, hi, bands.argmin[n])] {
            let theta = bands.thetas[idx];
            let targets: &[f64] = if idx == 0 {
                &[2.0]
            } else if 2 * idx == bands.thetas.len() {
                &[-2.0]
            } else {
                &[2.0, -2.0]
            };
            let mut root = f64::NAN;
            for &t in targets {
                if let Some(r) = discriminant_root(v, t, value, 0.5 * (hi - lo))? {
                    root = r;
                    break;
                }
            }
            out.push(EdgeCheck { band, upper, theta, band_edge: value, discriminant_root: root, difference: (value - root).abs() });
        }
    }
    Ok(out)
}

/// Numerical settings of an edge trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSettings {
    pub theta_count: usize,
    /// Band index `n` of the gap `(max E_n, min E_{n+1})` being followed.
    pub gap_band: usize,
    /// Use the symmetric window `|t|‖W‖`, required when `W` is indefinite.
    pub indefinite: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: f64,
    #[serde(with = "numfmt")]
    pub f_minus: f64,
    #[serde(with = "numfmt")]
    pub f_plus: f64,
    /// Difference quotients to the next grid point; NaN on the last row.
    #[serde(with = "numfmt")]
    pub slope_minus: f64,
    #[serde(with = "numfmt")]
    pub slope_plus: f64,
    pub pass: bool,
    /// Band intervals at this coupling, for plotting.
    pub bands: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTrace {
    pub a: f64,
    pub b: f64,
    pub w_sup: f64,
    /// `(b − a)/‖W‖_∞`, halved for indefinite `W`.
    pub t0: f64,
    #[serde(with = "numfmt")]
    pub kappa: f64,
    pub indefinite: bool,
    pub steps: Vec<TraceStep>,
    /// Smallest per-step increment of any `E_n(θ)`; must be ≥ 0 for `W ≥ 0`.
    #[serde(with = "numfmt")]
    pub monotone_min_increment: f64,
    /// `a + tκ ≤ f₋(t) < b` at every grid point.
    pub lower_edge_in_window: bool,
    pub truncated: Option<String>,
    pub pass: bool,
}

/// `sup(σ ∩ (−∞, c))` for a union of closed intervals.
fn sup_below(intervals: &[(f64, f64)], c: f64) -> f64 {
    intervals.iter().filter(|iv| iv.0 < c).map(|iv| iv.1.min(c)).fold(f64::NEG_INFINITY, f64::max)
}

/// `inf(σ ∩ (c, ∞))` for a union of closed intervals.
fn inf_above(intervals: &[(f64, f64)], c: f64) -> f64 {
    intervals.iter().filter(|iv| iv.1 > c).map(|iv| iv.0.max(c)).fold(f64::INFINITY, f64::min)
}

/// Follows the two edges of a gap of `H = −d²/dx² + V` along `H + tW`.
///
/// `f₋(t) = sup(σ(H+tW) ∩ (−∞, b − t₋‖W‖))` and
/// `f₊(t) = inf(σ(H+tW) ∩ (a + t₊‖W‖, ∞))`; for indefinite `W` both windows
/// use `|t|‖W‖`. Each step asserts `κε ≤ Δf ≤ ‖W‖ε` (only `|Δf| ≤ ‖W‖ε` when
/// indefinite).
pub fn trace_edges(
    v: &CellPotential,
    w: &CellPotential,
    t_grid: &[f64],
    kappa: f64,
    settings: TraceSettings,
) -> Result<EdgeTrace> {
    let bands_needed = settings.gap_band + 1;
    let base = compute_bands(v, settings.theta_count, bands_needed)?;
    let (a, b) = base
        .gap_above(settings.gap_band)
        .ok_or_else(|| Error::Precondition(format!("no open gap above band {}", settings.gap_band)))?;
    let w_stats = w.stats();
    let w_sup = w_stats.sup;
    if w_sup == 0.0 {
        return Err(Error::InvalidParameter { name: "W", reason: "perturbation vanishes".into() });
    }
    if !settings.indefinite && w_stats.min < 0.0 {
        return Err(Error::Precondition(format!("W takes the negative value {}", w_stats.min)));
    }
    let t0 = if settings.indefinite { 0.5 } else { 1.0 } * (b - a) / w_sup;
    if t_grid.len() < 2 || t_grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidParameter { name: "t_grid", reason: "need at least two increasing points".into() });
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t >= 0.0 && t < t0)) {
        return Err(Error::InvalidParameter { name: "t_grid", reason: format!("t = {t} outside [0, t0) with t0 = {t0}") });
    }
    // values within this distance of a window boundary count as outside it
    let snap = 1e-8 * a.abs().max(b.abs()).max(1.0);
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut truncated = None;
    let mut prev: Option<BandFunctions> = None;
    let mut monotone_min_increment = f64::INFINITY;
    for &t in t_grid {
        let bf = if t == 0.0 { base.clone() } else { compute_bands(&v.coupled(w, t)?, settings.theta_count, bands_needed)? };
        let (t_plus, t_minus) = if settings.indefinite { (t.abs(), t.abs()) } else { (t.max(0.0), (-t).max(0.0)) };
        let f_minus = sup_below(&bf.intervals, b - t_minus * w_sup - snap);
        let f_plus = inf_above(&bf.intervals, a + t_plus * w_sup + snap);
        if !(f_minus.is_finite() && f_plus.is_finite() && f_minus < f_plus) {
            truncated = Some(format!("gap closed at t = {t}: f- = {f_minus}, f+ = {f_plus}"));
            break;
        }
        if let Some(p) = &prev {
            for (rn, rp) in bf.energies.iter().zip(&p.energies) {
                for (x, y) in rn.iter().zip(rp) {
                    monotone_min_increment = monotone_min_increment.min(x - y);
                }
            }
        }
        steps.push(TraceStep {
            t,
            f_minus,
            f_plus,
            slope_minus: f64::NAN,
            slope_plus: f64::NAN,
            pass: true,
            bands: bf.intervals.clone(),
        });
        prev = Some(bf);
    }
    for i in 0..steps.len().saturating_sub(1) {
        let eps = steps[i + 1].t - steps[i].t;
        let dm = steps[i + 1].f_minus - steps[i].f_minus;
        let dp = steps[i + 1].f_plus - steps[i].f_plus;
        let within = |d: f64| {
            if settings.indefinite {
                d.abs() <= w_sup * eps + EDGE_SLACK
            } else {
                d >= kappa * eps - EDGE_SLACK && d <= w_sup * eps + EDGE_SLACK
            }
        };
        steps[i].slope_minus = dm / eps;
        steps[i].slope_plus = dp / eps;
        steps[i].pass = within(dm) && within(dp);
    }
    let lower_edge_in_window = settings.indefinite || steps.iter().all(|s| s.f_minus >= a + s.t * kappa - EDGE_SLACK && s.f_minus < b);
    let monotone_ok = settings.indefinite || monotone_min_increment >= -EDGE_SLACK;
    let pass = truncated.is_none() && steps.iter().all(|s| s.pass) && lower_edge_in_window && monotone_ok;
    Ok(EdgeTrace {
        a,
        b,
        w_sup,
        t0,
        kappa,
        indefinite: settings.indefinite,
        steps,
        monotone_min_increment,
        lower_edge_in_window,
        truncated,
        pass,
    })
}

impl EdgeTrace {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "f_minus", "f_plus", "slope_minus", "slope_plus", "kappa", "pass"])?;
        for s in &self.steps {
            w.write_record([
                numfmt::cell(s.t),
                numfmt::cell(s.f_minus),
                numfmt::cell(s.f_plus),
                numfmt::cell(s.slope_minus),
                numfmt::cell(s.slope_plus),
                numfmt::cell(self.kappa),
                s.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Band diagram: shaded band intervals per coupling value with the two
    /// traced edges on top.
    pub fn to_svg(&self) -> String {
        let (width, height, margin) = (640.0, 420.0, 50.0);
        let t_lo = self.steps.first().map_or(0.0, |s| s.t);
        let t_hi = self.steps.last().map_or(1.0, |s| s.t).max(t_lo + 1e-12);
        let e_lo = self.a - 0.5 * (self.b - self.a);
        let e_hi = self.b + 0.5 * (self.b - self.a) + self.w_sup * t_hi;
        let x = |t: f64| margin + (t - t_lo) / (t_hi - t_lo) * (width - 2.0 * margin);
        let y = |e: f64| height - margin - (e.clamp(e_lo, e_hi) - e_lo) / (e_hi - e_lo) * (height - 2.0 * margin);
        let mut svg = String::new();
        let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#);
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let n = self.steps.len();
        for s in &self.steps {
            let half = if n > 1 { 0.5 * (t_hi - t_lo) / (n - 1) as f64 } else { 0.5 };
            let (x0, x1) = (x((s.t - half).max(t_lo)), x((s.t + half).min(t_hi)));
            for &(lo, hi) in &s.bands {
                if hi < e_lo || lo > e_hi {
                    continue;
                }
                let _ = writeln!(
                    svg,
                    r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="none"/>"##,
                    x0,
                    y(hi),
                    (x1 - x0).max(0.5),
                    (y(lo) - y(hi)).max(0.5)
                );
            }
        }
        for (pick, colour) in [(0usize, "#d62728"), (1, "#2ca02c")] {
            let pts: Vec<String> = self
                .steps
                .iter()
                .map(|s| format!("{:.2},{:.2}", x(s.t), y(if pick == 0 { s.f_minus } else { s.f_plus })))
                .collect();
            let _ = writeln!(svg, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(
            svg,
            r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black"/>"#,
            m = margin,
            b = height - margin,
            r = width - margin
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">t</text>"#, width / 2.0, height - 15.0);
        let _ = writeln!(svg, r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})">E</text>"#, height / 2.0, height / 2.0);
        let _ = writeln!(svg, r#"<text x="{margin}" y="{}" font-size="10">{:.4}</text>"#, height - margin + 14.0, t_lo);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.4}</text>"#, width - margin, height - margin + 14.0, t_hi);
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;
    use std::f64::consts::PI;

    #[test]
    fn free_discriminant_is_cosine() {
        let v = CellPotential::constant(1.0, 512, 0.0).unwrap();
        for e in [0.0, 1.0, PI * PI, 20.0, 50.0] {
            let d = discriminant(&v, e).unwrap();
            assert!((d - 2.0 * e.sqrt().cos()).abs() < 1e-7, "E={e}: {d}");
        }
        assert!((discriminant(&v, 0.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn free_band_edges() {
        let v = CellPotential::constant(1.0, 256, 0.0).unwrap();
        let bf = compute_bands(&v, 32, 4).unwrap();
        assert!(bf.intervals[0].0.abs() < 1e-9);
        for n in 1..4 {
            let edge = (n as f64 * PI).powi(2);
            assert!((bf.intervals[n - 1].1 - edge).abs() < 1e-6 * edge);
            assert!((bf.intervals[n].0 - edge).abs() < 1e-6 * edge);
        }
        assert!(bf.gaps.iter().all(|g| g.2 - g.1 < 1e-6));
    }

    #[test]
    fn constant_shift() {
        let v0 = CellPotential::constant(1.0, 128, 0.0).unwrap();
        let v1 = CellPotential::constant(1.0, 128, 1.5).unwrap();
        let a = compute_bands(&v0, 16, 3).unwrap();
        let b = compute_bands(&v1, 16, 3).unwrap();
        for (ra, rb) in a.energies.iter().zip(&b.energies) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((y - x - 1.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fiber_symmetries_and_dense_agreement() {
        let v = CellPotential::cosine(1.0, 32, 2.0).unwrap();
        let f0 = fiber_matrix(&v, 0.0).unwrap();
        assert!(f0.is_real());
        let th = 1.1;
        let e1 = eigenvalues(&fiber_matrix(&v, th).unwrap().embed_real()).unwrap();
        let e2 = eigenvalues(&fiber_matrix(&v, 2.0 * PI - th).unwrap().embed_real()).unwrap();
        for (x, y) in e1.iter().zip(&e2) {
            assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
        }
        let band = bloch_fiber(&v, th, 4).unwrap();
        for (k, x) in band.eigenvalues.iter().enumerate() {
            assert!((x - e1[2 * k]).abs() < 1e-8 * x.abs().max(1.0), "{x} vs {}", e1[2 * k]);
        }
    }

    #[test]
    fn mathieu_gap_cross_oracle() {
        let v = CellPotential::cosine(1.0, 1024, 2.0).unwrap();
        let bf = compute_bands(&v, 16, 3).unwrap();
        assert!(bf.gap_above(1).is_some());
        let checks = cross_check_edges(&v, &bf).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.difference < 1e-6, "{c:?}");
        }
    }

    #[test]
    fn constant_coupling_moves_edges_by_t() {
        let v = CellPotential::cosine(1.0, 128, 2.0).unwrap();
        let w = CellPotential::constant(1.0, 128, 1.0).unwrap();
        let settings = TraceSettings { theta_count: 16, gap_band: 1, indefinite: false };
        let bf = compute_bands(&v, 16, 2).unwrap();
        let (a, b) = bf.gap_above(1).unwrap();
        let ts: Vec<f64> = (0..5).map(|i| i as f64 * 0.2 * (b - a)).collect();
        let tr = trace_edges(&v, &w, &ts, 1e-3, settings).unwrap();
        assert!(tr.pass, "{tr:?}");
        for s in &tr.steps[..4] {
            assert!((s.slope_minus - 1.0).abs() * 0.2 * (b - a) < 1e-9);
            assert!((s.slope_plus - 1.0).abs() * 0.2 * (b - a) < 1e-9);
        }
        assert!(trace_edges(&v, &w, &[0.0, (b - a) * 1.01], 0.0, settings).is_err());
    }

    #[test]
    fn csv_and_svg_render() {
        let v = CellPotential::cosine(1.0, 64, 2.0).unwrap();
        let w = CellPotential::from_fn(1.0, 64, |x| if (x - 0.5).abs() < 0.2 { 1.0 } else { 0.0 }).unwrap();
        let settings = TraceSettings { theta_count: 16, gap_band: 1, indefinite: false };
        let tr = trace_edges(&v, &w, &[0.0, 0.1, 0.2], 0.0, settings).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("t,f_minus,f_plus,slope_minus,slope_plus,kappa,pass\n"));
        let svg = tr.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
