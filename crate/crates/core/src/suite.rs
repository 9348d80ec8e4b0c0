//! Property suites behind `full-verify`. Each suite draws seeded random
//! instances, checks one family of invariants and reports counts and the
//! worst observed margin. Failures are reported, never thrown.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{compute_bands, cross_check_edges, trace_edges, CellPotential, TraceSettings};
use crate::calculus::{extend, extend_with_profile, residual_order, sandwich_check, Profile};
use crate::error::{Error, Result};
use crate::gap::{gls_minimax, automorphism_check};
use crate::lifting::{
    c_uc, davis_kahan_check, interval_movement_check, kappa, ucp_verify, verify_bottom_lifting,
    verify_gap_comparison_left, verify_gap_comparison_right, verify_gap_lifting_left, verify_gap_lifting_right,
    ComparisonVariant, LeftVariant, LiftingCertificate, RightVariant,
};
use crate::linalg::{
    compression_min, eigendecompose, eigenvalues, spectral_projector, symmetric_norm, Interval, SymmetricMatrix,
};
use crate::numfmt;
use crate::schrodinger::{
    build_hamiltonian, sample_equidistributed, AdmissibleDomain, Boundary, Grid, PotentialField, PotentialStats,
};
use crate::synth::{dominated_by, gapped_matrix, gaussian, psd_with_bounds, symmetric_with_norm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeProfile {
    Smoke,
    Full,
}

impl std::str::FromStr for SizeProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(SizeProfile::Smoke),
            "full" => Ok(SizeProfile::Full),
            other => Err(Error::Config(format!("unknown profile `{other}` (expected smoke or full)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub profile: SizeProfile,
    /// Factor applied to every lifting constant handed to a verifier. Only
    /// useful as a negative control; 1 in normal runs.
    pub tamper_kappa: f64,
}

impl VerifyOptions {
    pub fn new(seed: u64, profile: SizeProfile) -> Self {
        Self { seed, profile, tamper_kappa: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub module: String,
    pub property: String,
    pub cases: usize,
    pub failures: usize,
    /// Worst value of the suite's figure of merit; see `measure`.
    #[serde(with = "numfmt")]
    pub worst: f64,
    pub measure: String,
    pub note: String,
    pub pass: bool,
}

struct Ctx {
    rng: ChaCha8Rng,
    full: bool,
    tamper: f64,
}

impl Ctx {
    fn size(&self, smoke: usize, full: usize) -> usize {
        if self.full {
            full
        } else {
            smoke
        }
    }
}

/// Running tally of a suite. `worst` is folded with `max` unless the
/// measure is a margin, in which case lower is worse.
struct Tally {
    module: &'static str,
    property: &'static str,
    measure: &'static str,
    lower_is_worse: bool,
    cases: usize,
    failures: usize,
    worst: f64,
    notes: Vec<String>,
}

impl Tally {
    fn new(module: &'static str, property: &'static str, measure: &'static str, lower_is_worse: bool) -> Self {
        let worst = if lower_is_worse { f64::INFINITY } else { f64::NEG_INFINITY };
        Self { module, property, measure, lower_is_worse, cases: 0, failures: 0, worst, notes: Vec::new() }
    }

    fn record(&mut self, ok: bool, value: f64) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
        if !value.is_nan() {
            self.worst = if self.lower_is_worse { self.worst.min(value) } else { self.worst.max(value) };
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            module: self.module.into(),
            property: self.property.into(),
            pass: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            measure: self.measure.into(),
            note: self.notes.join("; "),
        }
    }
}

type SuiteFn = fn(&mut Ctx) -> Result<SuiteResult>;

const SUITES: &[(&str, &str, SuiteFn)] = &[
    ("linalg", "eigensolver_soundness", eigensolver_soundness),
    ("linalg", "weyl_inequalities", weyl_inequalities),
    ("schrodinger", "discrete_dirichlet_spectrum", dirichlet_spectrum),
    ("spectral-calculus", "ghost_residual_order", ghost_residual_suite),
    ("spectral-calculus", "h1_sandwich", sandwich_suite),
    ("gap-spectrum", "minimax_equality", minimax_suite),
    ("gap-spectrum", "automorphism_lemma", automorphism_suite),
    ("lifting", "constant_monotonicity", constant_suite),
    ("lifting", "bottom_lifting", bottom_suite),
    ("lifting", "gap_lifting_left", gap_left_suite),
    ("lifting", "gap_lifting_right", gap_right_suite),
    ("lifting", "negative_controls", negative_control_suite),
    ("lifting", "davis_kahan", davis_kahan_suite),
    ("lifting", "interval_movement", interval_suite),
    ("lifting", "unique_continuation", ucp_suite),
    ("band-structure", "free_band_edges", free_bands_suite),
    ("band-structure", "discriminant_cross_oracle", cross_oracle_suite),
    ("band-structure", "edge_trace_sandwich", trace_suite),
    ("band-structure", "constant_coupling_trace", constant_trace_suite),
    ("band-structure", "indefinite_lipschitz", indefinite_trace_suite),
];

/// Names of all suites in execution order.
pub fn suite_names() -> Vec<String> {
    SUITES.iter().map(|(m, p, _)| format!("{m}/{p}")).collect()
}

/// Runs every suite. Suites run concurrently on the current rayon pool; the
/// result order and content depend only on the options.
pub fn full_verify(opts: &VerifyOptions) -> Vec<SuiteResult> {
    (0..SUITES.len()).into_par_iter().map(|i| run_index(i, opts)).collect()
}

/// One suite by property name, seeded exactly as inside [`full_verify`].
pub fn run_suite(property: &str, opts: &VerifyOptions) -> Option<SuiteResult> {
    SUITES.iter().position(|s| s.1 == property).map(|i| run_index(i, opts))
}

fn run_index(i: usize, opts: &VerifyOptions) -> SuiteResult {
    let (module, property, f) = SUITES[i];
    let seed = opts.seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1));
    let mut ctx = Ctx {
        rng: ChaCha8Rng::seed_from_u64(seed),
        full: opts.profile == SizeProfile::Full,
        tamper: opts.tamper_kappa,
    };
    f(&mut ctx).unwrap_or_else(|e| SuiteResult {
        module: module.to_string(),
        property: property.to_string(),
        cases: 0,
        failures: 1,
        worst: f64::NAN,
        measure: String::new(),
        note: format!("error: {e}"),
        pass: false,
    })
}

pub fn write_suite_csv(results: &[SuiteResult], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["module", "property", "cases", "failures", "worst", "measure", "pass"])?;
    for r in results {
        w.write_record([
            r.module.clone(),
            r.property.clone(),
            r.cases.to_string(),
            r.failures.to_string(),
            numfmt::cell(r.worst),
            r.measure.clone(),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn random_symmetric(n: usize, tridiagonal: bool, rng: &mut impl Rng) -> Result<SymmetricMatrix> {
    if tridiagonal {
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let e: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SymmetricMatrix::tridiagonal(&d, &e)
    } else {
        let mut m = SymmetricMatrix::zeros(n, n.saturating_sub(1));
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, gaussian(rng));
            }
        }
        Ok(m)
    }
}

fn eigensolver_soundness(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("linalg", "eigensolver_soundness", "max(residual/‖A‖, orthogonality)", false);
    let count = ctx.size(8, 50);
    let n_max = ctx.size(80, 400);
    for i in 0..count {
        let n = ctx.rng.gen_range(20..=n_max);
        let a = random_symmetric(n, i % 2 == 1, &mut ctx.rng)?;
        let dec = eigendecompose(&a)?;
        let norm = dec.norm().max(f64::MIN_POSITIVE);
        let res = dec.max_residual(&a) / norm;
        let orth = dec.orthogonality_defect();
        let worst = res.max(orth);
        t.record(worst <= 1e-10, worst);
    }
    Ok(t.finish())
}

fn weyl_inequalities(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("linalg", "weyl_inequalities", "min slack of λ_k(A)+λ_min(B) ≤ λ_k(A+B) ≤ λ_k(A)+λ_max(B)", true);
    for _ in 0..ctx.size(5, 30) {
        let n = ctx.rng.gen_range(5..=40);
        let a = random_symmetric(n, false, &mut ctx.rng)?;
        let b = random_symmetric(n, false, &mut ctx.rng)?;
        let (ea, eb, es) = (eigenvalues(&a)?, eigenvalues(&b)?, eigenvalues(&a.add(&b)?)?);
        let tol = 1e-12 * (symmetric_norm(&a)? + symmetric_norm(&b)?);
        let slack = (0..n)
            .map(|k| (es[k] - ea[k] - eb[0]).min(ea[k] + eb[n - 1] - es[k]))
            .fold(f64::INFINITY, f64::min);
        t.record(slack >= -tol, slack);
    }
    Ok(t.finish())
}

fn dirichlet_spectrum(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("schrodinger", "discrete_dirichlet_spectrum", "relative error vs (4/h²)sin²(kπh/2L)", false);
    for _ in 0..ctx.size(3, 10) {
        let len = ctx.rng.gen_range(1..=6) as f64;
        let ppu = [16usize, 32, 64][ctx.rng.gen_range(0..3)];
        let dom = AdmissibleDomain::new(&[0.0], &[len], 1.0)?;
        let grid = Grid::with_resolution(&dom, ppu, Boundary::Dirichlet)?;
        let ev = eigenvalues(&build_hamiltonian(&dom, &grid, &PotentialField::zero(&grid))?)?;
        let h = grid.h();
        let worst = ev
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let exact = 4.0 / (h * h) * ((k + 1) as f64 * std::f64::consts::PI * h / (2.0 * len)).sin().powi(2);
                (l - exact).abs() / exact
            })
            .fold(0.0, f64::max);
        t.record(worst <= 1e-10, worst);
    }
    // 2D: eigenvalues are pairwise sums of the 1D ones
    let dom = AdmissibleDomain::new(&[0.0, 0.0], &[2.0, 1.0], 1.0)?;
    let grid = Grid::with_resolution(&dom, 8, Boundary::Dirichlet)?;
    let ev = eigenvalues(&build_hamiltonian(&dom, &grid, &PotentialField::zero(&grid))?)?;
    let h = grid.h();
    let mu = |k: usize, l: f64| 4.0 / (h * h) * ((k as f64) * std::f64::consts::PI * h / (2.0 * l)).sin().powi(2);
    let mut sums: Vec<f64> = Vec::new();
    for i in 1..=grid.counts()[0] {
        for j in 1..=grid.counts()[1] {
            sums.push(mu(i, 2.0) + mu(j, 1.0));
        }
    }
    sums.sort_by(f64::total_cmp);
    let worst = ev.iter().zip(&sums).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
    t.record(worst <= 1e-10, worst);
    Ok(t.finish())
}

fn ghost_problem(rng: &mut impl Rng) -> Result<(PotentialField, SymmetricMatrix, crate::linalg::SpectralDecomposition)> {
    let dom = AdmissibleDomain::new(&[0.0], &[1.0], 1.0)?;
    let grid = Grid::with_resolution(&dom, 32, Boundary::Dirichlet)?;
    let v = PotentialField::cosine(&grid, rng.gen_range(0.0..5.0), 1.0, rng.gen_range(0.0..1.0))?;
    let h = build_hamiltonian(&dom, &grid, &v)?;
    let dec = eigendecompose(&h)?;
    Ok((v, h, dec))
}

fn ghost_residual_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("spectral-calculus", "ghost_residual_order", "min observed order under Δt halving", true);
    for i in 0..ctx.size(3, 10) {
        let (_, h, dec) = ghost_problem(&mut ctx.rng)?;
        let modes = if i % 2 == 0 { 1 } else { 3 };
        let first = ctx.rng.gen_range(0..4);
        let mut psi = vec![0.0; dec.n()];
        for k in first..first + modes {
            let c = gaussian(&mut ctx.rng);
            psi.iter_mut().zip(dec.eigenvector(k)).for_each(|(p, e)| *p += c * e);
        }
        let w = (dec.eigenvalue(first) - 1.0, dec.eigenvalue(first + modes - 1) + 1.0);
        let coarse = extend(&psi, &dec, w, 0.5, 33)?;
        let fine = extend(&psi, &dec, w, 0.5, 65)?;
        let order = residual_order(&coarse, &fine, &h)?;
        let odd_ok = fine.initial_value() == 0.0 && fine.oddness_defect() == 0.0;
        // the swapped branch solves the wrong equation, so refining Δt must not help
        let sw = |m| extend_with_profile(&psi, &dec, w, 0.5, m, Profile::SwappedBranch);
        let bad_order = residual_order(&sw(33)?, &sw(65)?, &h)?;
        let control_ok = bad_order < 0.5;
        t.record(order >= 1.9 && odd_ok && control_ok, order);
    }
    Ok(t.finish())
}

fn sandwich_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("spectral-calculus", "h1_sandwich", "min relative margin", true);
    for _ in 0..ctx.size(5, 20) {
        let (v, h, dec) = ghost_problem(&mut ctx.rng)?;
        let top = ctx.rng.gen_range(0..6);
        let mut psi = vec![0.0; dec.n()];
        for k in 0..=top {
            let c = gaussian(&mut ctx.rng);
            psi.iter_mut().zip(dec.eigenvector(k)).for_each(|(p, e)| *p += c * e);
        }
        let e = dec.eigenvalue(top);
        let tau = ctx.rng.gen_range(0.05..0.5);
        let ext = extend(&psi, &dec, (dec.eigenvalue(0) - 1.0, e), tau, 33)?;
        let rep = sandwich_check(&ext, &h, &v, e, tau)?;
        t.record(rep.pass, rep.relative_margin());
    }
    Ok(t.finish())
}

fn gap_instance(rng: &mut impl Rng, n_lo: usize, n_hi: usize) -> (SymmetricMatrix, f64, f64) {
    let n = rng.gen_range(n_lo..=n_hi);
    let dl = rng.gen_range(0.5..1.5);
    let dr = rng.gen_range(0.5..1.5);
    (gapped_matrix(n, (-dl, dr), 3.0, rng), dl, dr)
}

fn minimax_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("gap-spectrum", "minimax_equality", "max |reference − achievability| / ‖A‖", false);
    let target = ctx.size(8, 50);
    let mut skipped = 0;
    while t.cases < target && skipped < 10 * target {
        let (a, dl, dr) = gap_instance(&mut ctx.rng, 20, 40);
        let b = symmetric_with_norm(a.n(), ctx.rng.gen_range(0.05..0.45) * dl.min(dr), &mut ctx.rng);
        let n = 1 + t.cases % 3;
        let rep = match gls_minimax(&a, &b, 0.0, n, 10, &mut ctx.rng) {
            Ok(r) => r,
            Err(Error::InvalidParameter { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if !rep.hypotheses.iter().all(|h| h.pass) {
            skipped += 1;
            continue;
        }
        let norm = symmetric_norm(&a)?;
        t.record(rep.pass, rep.gap / norm);
    }
    t.note(format!("{skipped} draws skipped for failing hypotheses"));
    Ok(t.finish())
}

fn automorphism_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("gap-spectrum", "automorphism_lemma", "max Sylvester residual", false);
    let mut s_max: f64 = 0.0;
    for i in 0..ctx.size(8, 50) {
        let (a, _, _) = gap_instance(&mut ctx.rng, 20, 40);
        let n = a.n();
        let b = if i % 2 == 0 {
            symmetric_with_norm(n, ctx.rng.gen_range(0.05..0.45), &mut ctx.rng)
        } else {
            // strongly coupled rank-two B = β(uvᵀ + vuᵀ) between the two sides
            let dec = eigendecompose(&a)?;
            let below = dec.eigenvalues().iter().filter(|&&l| l < 0.0).count();
            let u = dec.eigenvector(ctx.rng.gen_range(0..below));
            let v = dec.eigenvector(ctx.rng.gen_range(below..n));
            let beta = ctx.rng.gen_range(0.5..3.0);
            SymmetricMatrix::from_fn(n, n - 1, |r, c| beta * (u[r] * v[c] + v[r] * u[c]))
        };
        match automorphism_check(&a, &b, 0.0) {
            Ok(rep) => {
                s_max = s_max.max(rep.s_norm);
                t.record(rep.pass && rep.sylvester_residual <= 1e-12 && rep.neumann_ok, rep.sylvester_residual);
            }
            Err(Error::Precondition(_)) | Err(Error::GammaOnSpectrum { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    t.note(format!("max ‖S‖ {s_max:.4}"));
    Ok(t.finish())
}

fn constant_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("lifting", "constant_monotonicity", "max violation", false);
    for _ in 0..ctx.size(10, 40) {
        let g = ctx.rng.gen_range(0.5..2.0);
        let delta = ctx.rng.gen_range(0.05..0.45) * g;
        let lo = ctx.rng.gen_range(-5.0..5.0);
        let s = PotentialStats { min: lo, max: lo + ctx.rng.gen_range(0.0..10.0), sup: 0.0 };
        let e = ctx.rng.gen_range(-10.0..50.0);
        let w = ctx.rng.gen_range(0.0..3.0);
        let theta = ctx.rng.gen_range(0.1..2.0);
        let nd = ctx.rng.gen_range(1.0..10.0);
        let base = kappa(1, g, delta, theta, &s, w, e, nd)?;
        let checks = [
            kappa(1, g, delta, theta, &s, w, e + 1.0, nd)? - base,
            kappa(1, g, delta, theta, &PotentialStats { max: s.max + 1.0, ..s }, w, e, nd)? - base,
            kappa(1, g, delta, theta, &s, w + 0.5, e, nd)? - base,
            base - kappa(1, g, (delta * 1.1).min(0.4999 * g), theta, &s, w, e, nd)?,
            base - kappa(1, g, delta, theta * 1.5, &s, w, e, nd)?,
        ];
        let cu = c_uc(1, g, delta, &s, e, nd)?;
        let shifted = c_uc(1, g, delta, &s.shifted(3.25), e + 3.25, nd)?;
        let shift_err = (cu.log_value - shifted.log_value).abs() / cu.log_value.abs().max(1.0);
        let worst = checks.iter().copied().fold(0.0f64, f64::max).max(0.0);
        t.record(worst <= 0.0 && shift_err <= 1e-12 && cu.value <= 1.0, worst.max(shift_err));
    }
    Ok(t.finish())
}

fn form_min_for(w: &SymmetricMatrix, sum: &SymmetricMatrix, interval: Interval) -> Result<f64> {
    let dec = eigendecompose(sum)?;
    compression_min(w, spectral_projector(&dec, interval).basis())
}

fn record_cert(t: &mut Tally, cert: &LiftingCertificate) {
    let scale = cert.tolerance / crate::lifting::MARGIN_TOL;
    t.record(cert.pass, if cert.margin.is_finite() { cert.margin / scale } else { f64::NAN });
}

fn bottom_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("lifting", "bottom_lifting", "min margin / ‖H+W‖", true);
    let mut worst_scalar: f64 = 0.0;
    for i in 0..ctx.size(15, 100) {
        let n = ctx.rng.gen_range(20..=60);
        let h = random_symmetric(n, i % 3 == 0, &mut ctx.rng)?;
        let (lo, hi) = {
            let ev = eigenvalues(&h)?;
            (ev[0], ev[n - 1])
        };
        let e = lo + ctx.rng.gen_range(0.1..0.9) * (hi - lo);
        if i % 5 == 4 {
            let k = ctx.rng.gen_range(-1.0..1.0);
            let w = SymmetricMatrix::identity(n).scaled(k);
            let cert = verify_bottom_lifting(&h, &w, e, k * ctx.tamper)?;
            worst_scalar = worst_scalar.max(cert.margin.abs());
            t.record(cert.pass && cert.margin.abs() <= 1e-12, cert.margin);
            continue;
        }
        let w = if i % 2 == 0 {
            psd_with_bounds(n, 0.0, ctx.rng.gen_range(0.1..2.0), &mut ctx.rng)
        } else {
            symmetric_with_norm(n, ctx.rng.gen_range(0.1..2.0), &mut ctx.rng)
        };
        let k = form_min_for(&w, &h.add(&w)?, Interval::at_most(e))?;
        if !k.is_finite() {
            continue;
        }
        let cert = verify_bottom_lifting(&h, &w, e, k * ctx.tamper)?;
        record_cert(&mut t, &cert);
    }
    // Schrödinger instances: W = ϑ1_S and κ from the explicit formula
    let dom = AdmissibleDomain::new(&[0.0], &[8.0], 1.0)?;
    let grid = Grid::with_resolution(&dom, 32, Boundary::Dirichlet)?;
    for j in 0..ctx.size(2, 5) {
        let v = PotentialField::piecewise_random(&dom, &grid, 10.0, ctx.rng.gen())?;
        let h = build_hamiltonian(&dom, &grid, &v)?;
        let set = sample_equidistributed(&dom, 0.2, ctx.rng.gen())?;
        let theta = 1.0 + j as f64;
        let w = set.mask(&grid).as_operator(theta);
        let e = 50.0;
        let k = kappa(1, 1.0, 0.2, theta, &v.stats(), theta, e, 10.0)?;
        let cert = verify_bottom_lifting(&h, &w, e, k * ctx.tamper)?;
        record_cert(&mut t, &cert);
    }
    t.note(format!("max |margin| for W = κI: {worst_scalar:.3e}"));
    Ok(t.finish())
}

fn gap_left_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("lifting", "gap_lifting_left", "min margin / ‖A+B‖", true);
    let count = ctx.size(4, 50);
    for variant in 0..4 {
        for _ in 0..count {
            let (a, dl, dr) = gap_instance(&mut ctx.rng, 40, 80);
            let n = a.n();
            let dist = dl.min(dr);
            let r = ctx.rng.gen_range(0.05..0.95);
            let cert = match variant {
                0 => {
                    let b = symmetric_with_norm(n, r * 0.5 * dist, &mut ctx.rng);
                    let k = form_min_for(&b, &a.add(&b)?, Interval::at_most(0.0))?;
                    verify_gap_lifting_left(&a, &b, 0.0, k * ctx.tamper, LeftVariant::Norm)?
                }
                1 => {
                    let b = psd_with_bounds(n, 0.0, r * dist, &mut ctx.rng);
                    let k = form_min_for(&b, &a.add(&b)?, Interval::at_most(0.0))?;
                    verify_gap_lifting_left(&a, &b, 0.0, k * ctx.tamper, LeftVariant::NonNegative)?
                }
                2 => {
                    // small dist^→ forces several intermediate couplings
                    let a = gapped_matrix(n, (-dl - 1.0, ctx.rng.gen_range(0.1..0.3)), 3.0, &mut ctx.rng);
                    let b = psd_with_bounds(n, ctx.rng.gen_range(0.0..0.1), r * (dl + 1.0), &mut ctx.rng);
                    let k = eigenvalues(&b)?[0];
                    verify_gap_lifting_left(&a, &b, 0.0, k * ctx.tamper, LeftVariant::Opt)?
                }
                _ => {
                    let b = psd_with_bounds(n, 0.0, r * dist / 3.5, &mut ctx.rng);
                    let c = dominated_by(&b, &mut ctx.rng);
                    let v = if t.cases.is_multiple_of(2) { ComparisonVariant::Norm } else { ComparisonVariant::NonNegative };
                    verify_gap_comparison_left(&a, &b, &c, 0.0, v)?
                }
            };
            record_cert(&mut t, &cert);
        }
    }
    Ok(t.finish())
}

fn gap_right_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("lifting", "gap_lifting_right", "min margin / ‖A+B‖", true);
    let count = ctx.size(4, 50);
    for variant in 0..3 {
        for _ in 0..count {
            let (a, dl, dr) = gap_instance(&mut ctx.rng, 40, 80);
            let n = a.n();
            let dist = dl.min(dr);
            let r = ctx.rng.gen_range(0.05..0.95);
            let e = ctx.rng.gen_range(0.5..4.0);
            let cert = match variant {
                0 => {
                    let b = symmetric_with_norm(n, r * 0.5 * dist, &mut ctx.rng);
                    let k = form_min_for(&b, &a.add(&b)?, Interval::at_most(e))?;
                    verify_gap_lifting_right(&a, &b, 0.0, k * ctx.tamper, e, RightVariant::Norm)?
                }
                1 => {
                    let b = psd_with_bounds(n, 0.0, r * dl, &mut ctx.rng);
                    let k = form_min_for(&b, &a.add(&b)?, Interval::at_most(e))?;
                    verify_gap_lifting_right(&a, &b, 0.0, k * ctx.tamper, e, RightVariant::NonNegative)?
                }
                _ => {
                    let b = psd_with_bounds(n, 0.0, r * dl, &mut ctx.rng);
                    let c = dominated_by(&b, &mut ctx.rng);
                    verify_gap_comparison_right(&a, &b, &c, 0.0, e)?
                }
            };
            record_cert(&mut t, &cert);
        }
    }
    Ok(t.finish())
}

/// Inputs violating one hypothesis each; every certificate must refuse.
fn negative_control_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("lifting", "negative_controls", "certificates not flagged precondition_failed", false);
    let count = ctx.size(2, 10);
    let mut missed = 0usize;
    for variant in 0..8 {
        for _ in 0..count {
            let (a, dl, dr) = gap_instance(&mut ctx.rng, 40, 80);
            let n = a.n();
            let dist = dl.min(dr);
            let e = ctx.rng.gen_range(0.5..4.0);
            let cert = match variant {
                0 => {
                    let b = symmetric_with_norm(n, dist * ctx.rng.gen_range(0.55..0.95), &mut ctx.rng);
                    verify_gap_lifting_left(&a, &b, 0.0, -b.max_abs(), LeftVariant::Norm)?
                }
                1 => {
                    let mut b = psd_with_bounds(n, 0.0, 0.5 * dist, &mut ctx.rng);
                    let i = ctx.rng.gen_range(0..n);
                    b.set(i, i, b.get(i, i) - 0.6 * dist);
                    verify_gap_lifting_left(&a, &b, 0.0, -dist, LeftVariant::NonNegative)?
                }
                2 => {
                    let b = psd_with_bounds(n, 0.0, dl * ctx.rng.gen_range(1.02..1.5), &mut ctx.rng);
                    verify_gap_lifting_left(&a, &b, 0.0, 0.0, LeftVariant::Opt)?
                }
                3 => {
                    let b = psd_with_bounds(n, 0.0, 0.3 * dist, &mut ctx.rng);
                    let c = dominated_by(&b, &mut ctx.rng);
                    verify_gap_comparison_left(&a, &c, &b, 0.0, ComparisonVariant::NonNegative)?
                }
                4 => {
                    let b = symmetric_with_norm(n, dist * ctx.rng.gen_range(0.55..0.95), &mut ctx.rng);
                    verify_gap_lifting_right(&a, &b, 0.0, -b.max_abs(), e, RightVariant::Norm)?
                }
                5 => {
                    let b = psd_with_bounds(n, 0.0, dl * ctx.rng.gen_range(1.02..1.5), &mut ctx.rng);
                    verify_gap_lifting_right(&a, &b, 0.0, 0.0, e, RightVariant::NonNegative)?
                }
                6 => {
                    let b = psd_with_bounds(n, 0.0, 0.5 * dl, &mut ctx.rng);
                    let c = dominated_by(&b, &mut ctx.rng);
                    verify_gap_comparison_right(&a, &c, &b, 0.0, e)?
                }
                _ => {
                    let w = psd_with_bounds(n, 0.0, 1.0, &mut ctx.rng);
                    let k = form_min_for(&w, &a.add(&w)?, Interval::at_most(e))?;
                    verify_bottom_lifting(&a, &w, e, k + 1e-3)?
                }
            };
            let ok = cert.precondition_failed();
            if !ok {
                missed += 1;
            }
            t.record(ok, missed as f64);
        }
    }
    Ok(t.finish())
}

fn davis_kahan_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("lifting", "davis_kahan", "min bound − measured", true);
    let a = SymmetricMatrix::diagonal(&[-1.0, 1.0]);
    let mut b = SymmetricMatrix::zeros(2, 1);
    b.set(1, 0, 0.25);
    let rep = davis_kahan_check(&a, &b, 0.0)?;
    let worked = format!("{:.4} {:.4}", rep.measured, rep.bound) == "0.1222 0.2588";
    t.record(rep.pass && worked, rep.bound - rep.measured);
    for _ in 0..ctx.size(20, 200) {
        let (a, dl, dr) = gap_instance(&mut ctx.rng, 10, 60);
        let b = symmetric_with_norm(a.n(), ctx.rng.gen_range(0.0..1.0) * 0.5 * dl.min(dr), &mut ctx.rng);
        let rep = davis_kahan_check(&a, &b, 0.0)?;
        t.record(rep.pass, rep.bound - rep.measured);
    }
    Ok(t.finish())
}

fn interval_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("lifting", "interval_movement", "eigenvalues of A+B inside (a+‖B‖, b)", false);
    for _ in 0..ctx.size(15, 100) {
        let (a, dl, dr) = gap_instance(&mut ctx.rng, 10, 60);
        let b = psd_with_bounds(a.n(), 0.0, ctx.rng.gen_range(0.0..1.5) * (dl + dr), &mut ctx.rng);
        let rep = interval_movement_check(&a, &b, -dl, dr)?;
        t.record(rep.pass, rep.offending.len() as f64);
    }
    // an indefinite perturbation must be refused
    let (a, dl, dr) = gap_instance(&mut ctx.rng, 10, 30);
    let b = symmetric_with_norm(a.n(), 0.3, &mut ctx.rng);
    let refused = matches!(interval_movement_check(&a, &b, -dl, dr), Err(Error::Precondition(_)));
    t.record(refused, 0.0);
    Ok(t.finish())
}

fn ucp_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("lifting", "unique_continuation", "min log(ratio) − log C_uc", true);
    let dom = AdmissibleDomain::new(&[0.0], &[8.0], 1.0)?;
    let grid = Grid::with_resolution(&dom, 64, Boundary::Dirichlet)?;
    let (nv, nz) = (ctx.size(3, 20), ctx.size(3, 20));
    let mut n_crit: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..nv {
        let v = PotentialField::piecewise_random(&dom, &grid, 10.0, ctx.rng.gen())?;
        let dec = eigendecompose(&build_hamiltonian(&dom, &grid, &v)?)?;
        for &delta in &[0.1, 0.2] {
            for _ in 0..nz {
                let set = sample_equidistributed(&dom, delta, ctx.rng.gen())?;
                let rep = ucp_verify(&grid, &v.stats(), &dec, &set, 50.0, 10.0)?;
                n_crit = n_crit.max(rep.critical_n_max).max(rep.form_critical_n);
                min_ratio = min_ratio.min(rep.min_ratio);
                let m = rep.form_min.min(rep.min_ratio).ln() - rep.constant.log_value;
                t.record(rep.pass, m);
            }
        }
    }
    t.note(format!("smallest ratio {min_ratio:.4e}; largest critical N {n_crit:.4}"));
    Ok(t.finish())
}

fn free_bands_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("band-structure", "free_band_edges", "max relative edge error vs (nπ)²", false);
    let (cells, thetas) = if ctx.full { (1024, 512) } else { (256, 64) };
    let v = CellPotential::constant(1.0, cells, 0.0)?;
    let bf = compute_bands(&v, thetas, 6)?;
    t.record(bf.intervals[0].0.abs() <= 1e-6, bf.intervals[0].0.abs());
    for n in 1..6 {
        let edge = (n as f64 * std::f64::consts::PI).powi(2);
        let err = ((bf.intervals[n - 1].1 - edge).abs()).max((bf.intervals[n].0 - edge).abs()) / edge;
        t.record(err <= 1e-6, err);
    }
    // V ≡ c: bands shift by c
    let c = ctx.rng.gen_range(-3.0..3.0);
    let shifted = compute_bands(&CellPotential::constant(1.0, 128, c)?, 16, 3)?;
    let free = compute_bands(&CellPotential::constant(1.0, 128, 0.0)?, 16, 3)?;
    let err = shifted
        .intervals
        .iter()
        .zip(&free.intervals)
        .map(|(s, f)| (s.0 - f.0 - c).abs().max((s.1 - f.1 - c).abs()))
        .fold(0.0, f64::max);
    t.record(err <= 1e-8, err);
    Ok(t.finish())
}

fn cross_oracle_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("band-structure", "discriminant_cross_oracle", "max |band edge − discriminant root|", false);
    let amps: Vec<f64> = if ctx.full { vec![2.0, 1.0, 3.0] } else { vec![2.0] };
    for amp in amps {
        let v = CellPotential::cosine(1.0, 1024, amp)?;
        let bf = compute_bands(&v, 16, 3)?;
        for c in cross_check_edges(&v, &bf)? {
            t.record(c.difference <= 1e-6, c.difference);
        }
    }
    Ok(t.finish())
}

/// Mathieu cell with `W = ϑ·1_S` for a single ball of radius `δ`.
fn mathieu_with_mask(cells: usize, delta: f64, theta: f64, center: f64) -> Result<(CellPotential, CellPotential)> {
    Ok((CellPotential::cosine(1.0, cells, 2.0)?, CellPotential::ball_indicator(1.0, cells, center, delta, theta)?))
}

fn t_grid(t0: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| t0 * i as f64 / points as f64).collect()
}

fn trace_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("band-structure", "edge_trace_sandwich", "min slack of κε ≤ Δf ≤ ‖W‖ε", true);
    let settings = TraceSettings { theta_count: 64, gap_band: 1, indefinite: false };
    let base = compute_bands(&CellPotential::cosine(1.0, 256, 2.0)?, 64, 2)?;
    let (a, b) = base.gap_above(1).ok_or_else(|| Error::Precondition("Mathieu gap closed".into()))?;
    for _ in 0..ctx.size(1, 3) {
        let theta = ctx.rng.gen_range(0.5..2.0);
        let center = ctx.rng.gen_range(0.2..0.8);
        let (v, w) = mathieu_with_mask(256, 0.2, theta, center)?;
        let t0 = (b - a) / theta;
        let k = kappa(1, 1.0, 0.2, theta, &v.stats(), t0 * theta, (2.0 * b - a).max(0.0), 10.0)? * ctx.tamper;
        let tr = trace_edges(&v, &w, &t_grid(t0, 20), k, settings)?;
        let mut slack = f64::INFINITY;
        for s in &tr.steps[..tr.steps.len() - 1] {
            for slope in [s.slope_minus, s.slope_plus] {
                slack = slack.min(slope - k).min(tr.w_sup - slope);
            }
        }
        t.record(tr.pass && tr.steps.len() == 20, slack);
        if tr.monotone_min_increment < 0.0 {
            t.note(format!("monotone increment {:.3e}", tr.monotone_min_increment));
        }
    }
    Ok(t.finish())
}

fn constant_trace_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("band-structure", "constant_coupling_trace", "max |Δf − ε|", false);
    let v = CellPotential::cosine(1.0, 256, 2.0)?;
    let c = ctx.rng.gen_range(0.5..2.0);
    let w = CellPotential::constant(1.0, 256, c)?;
    let settings = TraceSettings { theta_count: 32, gap_band: 1, indefinite: false };
    let bf = compute_bands(&v, 32, 2)?;
    let (a, b) = bf.gap_above(1).ok_or_else(|| Error::Precondition("Mathieu gap closed".into()))?;
    let ts = t_grid((b - a) / c, 20);
    let tr = trace_edges(&v, &w, &ts, 0.0, settings)?;
    let mut worst: f64 = 0.0;
    for (i, s) in tr.steps.iter().enumerate().take(tr.steps.len() - 1) {
        let eps = ts[i + 1] - ts[i];
        worst = worst.max((s.slope_minus * eps - c * eps).abs()).max((s.slope_plus * eps - c * eps).abs());
    }
    t.record(tr.pass && worst <= 1e-9, worst);
    Ok(t.finish())
}

fn indefinite_trace_suite(ctx: &mut Ctx) -> Result<SuiteResult> {
    let mut t = Tally::new("band-structure", "indefinite_lipschitz", "max |Δf|/ε − ‖W‖", false);
    let v = CellPotential::cosine(1.0, 256, 2.0)?;
    let amp = ctx.rng.gen_range(0.5..1.5);
    let w = CellPotential::from_fn(1.0, 256, |x| amp * (4.0 * std::f64::consts::PI * x).sin())?;
    let settings = TraceSettings { theta_count: 32, gap_band: 1, indefinite: true };
    let bf = compute_bands(&v, 32, 2)?;
    let (a, b) = bf.gap_above(1).ok_or_else(|| Error::Precondition("Mathieu gap closed".into()))?;
    let w_sup = w.stats().sup;
    let tr = trace_edges(&v, &w, &t_grid(0.5 * (b - a) / w_sup, 20), 0.0, settings)?;
    let worst = tr.steps[..tr.steps.len() - 1]
        .iter()
        .map(|s| s.slope_minus.abs().max(s.slope_plus.abs()) - w_sup)
        .fold(f64::NEG_INFINITY, f64::max);
    t.record(tr.pass, worst);
    Ok(t.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let names = suite_names();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
    }

    #[test]
    fn orthogonal_helper_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = crate::synth::random_orthogonal(5, &mut rng);
        let e = (q.transpose() * &q - nalgebra::DMatrix::<f64>::identity(5, 5)).abs().max();
        assert!(e < 1e-13);
    }
}
