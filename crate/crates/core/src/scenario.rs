//! Declarative TOML scenarios behind `specgap run`.
//!
//! A scenario names a `kind`, a seed and the blocks that kind needs. Every
//! numeric field is range-checked before any computation and errors point at
//! the offending line. Artifacts are written to one output directory and
//! depend only on the scenario and its seed.

use std::fmt::Display;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::bands::{compute_bands, cross_check_edges, trace_edges, BandFunctions, CellPotential, EdgeCheck, TraceSettings};
use crate::error::{Error, Result};
use crate::gap::{gls_minimax, automorphism_check, MinimaxReport, AutomorphismReport};
use crate::lifting::{self, kappa, ucp_verify, verify_bottom_lifting, verify_monotone, LiftingCertificate, Status};
use crate::linalg::{eigendecompose, SymmetricMatrix};
use crate::numfmt;
use crate::schrodinger::{
    build_hamiltonian, sample_equidistributed, AdmissibleDomain, Boundary, Grid, PotentialField,
};
use crate::suite::{full_verify, write_suite_csv, SizeProfile, VerifyOptions};
use crate::synth::{gapped_matrix, symmetric_with_norm};

type S<T> = Spanned<T>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: S<String>,
    seed: Option<S<i64>>,
    output: Option<RawOutput>,
    geometry: Option<S<RawGeometry>>,
    potential: Option<S<RawPotential>>,
    perturbation: Option<S<RawPotential>>,
    parameters: Option<S<RawParameters>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    svg: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    lower: Option<S<Vec<f64>>>,
    upper: Option<S<Vec<f64>>>,
    g: Option<S<f64>>,
    delta: Option<S<f64>>,
    points_per_unit: Option<S<i64>>,
    boundary: Option<Boundary>,
    period: Option<S<f64>>,
    cells: Option<S<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    kind: S<String>,
    amplitude: Option<S<f64>>,
    value: Option<S<f64>>,
    period: Option<S<f64>>,
    phase: Option<S<f64>>,
    path: Option<S<String>>,
    seed: Option<S<i64>>,
    theta: Option<S<f64>>,
    delta: Option<S<f64>>,
    center: Option<S<f64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawParameters {
    energy: Option<S<f64>>,
    n_dim: Option<S<f64>>,
    count: Option<S<i64>>,
    kappa: Option<S<f64>>,
    t_points: Option<S<i64>>,
    t_max: Option<S<f64>>,
    size: Option<S<i64>>,
    gap_left: Option<S<f64>>,
    gap_right: Option<S<f64>>,
    coupling: Option<S<f64>>,
    index: Option<S<i64>>,
    probes: Option<S<i64>>,
    bloch_points: Option<S<i64>>,
    band_count: Option<S<i64>>,
    gap_band: Option<S<i64>>,
    indefinite: Option<bool>,
    edge_tolerance: Option<S<f64>>,
    profile: Option<S<String>>,
}

/// Scenario kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Spectrum,
    Ucp,
    Lift,
    GapMinimax,
    BandEdge,
    FullVerify,
}

impl Kind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "spectrum" => Kind::Spectrum,
            "ucp" => Kind::Ucp,
            "lift" => Kind::Lift,
            "gap-minimax" => Kind::GapMinimax,
            "band-edge" => Kind::BandEdge,
            "full-verify" => Kind::FullVerify,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Ucp => "ucp",
            Kind::Lift => "lift",
            Kind::GapMinimax => "gap-minimax",
            Kind::BandEdge => "band-edge",
            Kind::FullVerify => "full-verify",
        }
    }
}

/// Field potential on a box grid.
#[derive(Clone, Debug)]
enum FieldSpec {
    Zero,
    Constant(f64),
    Cosine { amplitude: f64, period: f64, phase: f64 },
    PiecewiseRandom { amplitude: f64, seed: Option<u64> },
    Csv(PathBuf),
    /// `ϑ·1_S` on the equidistributed set of the geometry.
    Indicator { theta: f64 },
}

/// Potential on one period cell.
#[derive(Clone, Debug)]
enum CellSpec {
    Zero,
    Constant(f64),
    Cosine(f64),
    Sine(f64),
    Csv(PathBuf),
    Ball { theta: f64, delta: f64, center: f64 },
}

#[derive(Clone, Debug)]
struct BoxGeometry {
    lower: Vec<f64>,
    upper: Vec<f64>,
    g: f64,
    delta: Option<f64>,
    points_per_unit: usize,
    boundary: Boundary,
}

#[derive(Clone, Debug)]
enum Job {
    Spectrum { geo: BoxGeometry, v: FieldSpec, count: Option<usize>, energy: Option<f64> },
    Ucp { geo: BoxGeometry, v: FieldSpec, energy: f64, n_dim: f64 },
    Lift { geo: BoxGeometry, v: FieldSpec, w: FieldSpec, energy: f64, n_dim: f64, kappa: Option<f64>, t_points: usize },
    Minimax { size: usize, gap: (f64, f64), coupling: f64, index: usize, probes: usize },
    Bands {
        period: f64,
        cells: usize,
        v: CellSpec,
        w: Option<CellSpec>,
        bloch_points: usize,
        band_count: usize,
        gap_band: usize,
        indefinite: bool,
        kappa: Option<f64>,
        n_dim: f64,
        t_points: usize,
        t_max: Option<f64>,
        edge_tolerance: f64,
    },
    Verify { profile: SizeProfile },
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: Kind,
    pub seed: u64,
    /// Output directory from the config, already resolved against its location.
    pub output_dir: Option<PathBuf>,
    pub svg: bool,
    job: Job,
}

/// Locates validation errors in the source text.
struct Src<'a> {
    name: &'a str,
    text: &'a str,
}

impl Src<'_> {
    fn line(&self, span: &Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].matches('\n').count() + 1
    }

    fn err(&self, span: &Range<usize>, field: &str, msg: impl Display) -> Error {
        Error::Config(format!("{}:{}: `{field}`: {msg}", self.name, self.line(span)))
    }

    fn missing(&self, block: Option<&Range<usize>>, field: &str) -> Error {
        match block {
            Some(span) => self.err(span, field, "required for this kind"),
            None => Error::Config(format!("{}: `{field}` is required for this kind", self.name)),
        }
    }

    fn req<'v, T>(&self, v: &'v Option<S<T>>, block: Option<&Range<usize>>, field: &str) -> Result<&'v S<T>> {
        v.as_ref().ok_or_else(|| self.missing(block, field))
    }

    fn positive(&self, v: &S<f64>, field: &str) -> Result<f64> {
        let x = *v.get_ref();
        if x.is_finite() && x > 0.0 {
            Ok(x)
        } else {
            Err(self.err(&v.span(), field, format!("must be finite and > 0, got {x}")))
        }
    }

    fn finite(&self, v: &S<f64>, field: &str) -> Result<f64> {
        let x = *v.get_ref();
        if x.is_finite() {
            Ok(x)
        } else {
            Err(self.err(&v.span(), field, format!("must be finite, got {x}")))
        }
    }

    fn count(&self, v: &S<i64>, field: &str, min: i64, max: i64) -> Result<usize> {
        let x = *v.get_ref();
        if (min..=max).contains(&x) {
            Ok(x as usize)
        } else {
            Err(self.err(&v.span(), field, format!("must lie in [{min}, {max}], got {x}")))
        }
    }

    fn seed(&self, v: &S<i64>, field: &str) -> Result<u64> {
        let x = *v.get_ref();
        if x >= 0 {
            Ok(x as u64)
        } else {
            Err(self.err(&v.span(), field, format!("must be ≥ 0, got {x}")))
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: cannot read: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &path.display().to_string(), &base)
    }

    /// Parses and validates `text`. Relative paths inside it resolve against `base`.
    pub fn parse(text: &str, name: &str, base: &Path) -> Result<Self> {
        let raw: RawScenario =
            toml::from_str(text).map_err(|e| Error::Config(format!("{name}: {}", e.to_string().trim_end())))?;
        let src = Src { name, text };
        let kind = Kind::parse(raw.kind.get_ref()).ok_or_else(|| {
            src.err(
                &raw.kind.span(),
                "kind",
                format!("unknown kind `{}`; expected spectrum, ucp, lift, gap-minimax, band-edge or full-verify", raw.kind.get_ref()),
            )
        })?;
        let seed = match &raw.seed {
            Some(s) => src.seed(s, "seed")?,
            None => 0,
        };
        let output = raw.output.unwrap_or_default();
        let resolve = |p: &str| if Path::new(p).is_absolute() { PathBuf::from(p) } else { base.join(p) };
        let output_dir = output.dir.as_deref().map(resolve);

        let params_span = raw.parameters.as_ref().map(|p| p.span());
        let params = raw.parameters.map(|p| p.into_inner()).unwrap_or_default();
        let ps = params_span.as_ref();
        let n_dim = match &params.n_dim {
            Some(v) => src.positive(v, "parameters.n_dim")?,
            None => 10.0,
        };
        let t_points = match &params.t_points {
            Some(v) => src.count(v, "parameters.t_points", 2, 10_000)?,
            None => 20,
        };
        let kappa_override = match &params.kappa {
            Some(v) => Some(src.finite(v, "parameters.kappa")?),
            None => None,
        };

        let job = match kind {
            Kind::Spectrum | Kind::Ucp | Kind::Lift => {
                let geo = box_geometry(&src, raw.geometry.as_ref(), kind != Kind::Spectrum)?;
                let v = match &raw.potential {
                    Some(p) => field_spec(&src, p, "potential", resolve, false)?,
                    None => FieldSpec::Zero,
                };
                match kind {
                    Kind::Spectrum => {
                        let count = match &params.count {
                            Some(c) => Some(src.count(c, "parameters.count", 1, i64::MAX)?),
                            None => None,
                        };
                        let energy = match &params.energy {
                            Some(e) => Some(src.finite(e, "parameters.energy")?),
                            None => None,
                        };
                        Job::Spectrum { geo, v, count, energy }
                    }
                    Kind::Ucp => {
                        let energy = src.finite(src.req(&params.energy, ps, "parameters.energy")?, "parameters.energy")?;
                        Job::Ucp { geo, v, energy, n_dim }
                    }
                    _ => {
                        let p = raw
                            .perturbation
                            .as_ref()
                            .ok_or_else(|| Error::Config(format!("{name}: `perturbation` block is required for kind lift")))?;
                        let w = field_spec(&src, p, "perturbation", resolve, true)?;
                        if !matches!(w, FieldSpec::Indicator { .. }) && kappa_override.is_none() {
                            return Err(src.err(
                                &p.span(),
                                "parameters.kappa",
                                "required unless the perturbation is an indicator",
                            ));
                        }
                        let energy = src.finite(src.req(&params.energy, ps, "parameters.energy")?, "parameters.energy")?;
                        Job::Lift { geo, v, w, energy, n_dim, kappa: kappa_override, t_points }
                    }
                }
            }
            Kind::GapMinimax => {
                let size = match &params.size {
                    Some(v) => src.count(v, "parameters.size", 4, 2000)?,
                    None => 40,
                };
                let gl = match &params.gap_left {
                    Some(v) => src.positive(v, "parameters.gap_left")?,
                    None => 1.0,
                };
                let gr = match &params.gap_right {
                    Some(v) => src.positive(v, "parameters.gap_right")?,
                    None => 1.0,
                };
                let coupling = match &params.coupling {
                    Some(v) => src.finite(v, "parameters.coupling")?,
                    None => 0.25,
                };
                if !(0.0..=1.0).contains(&coupling) {
                    let v = params.coupling.as_ref().expect("checked above");
                    return Err(src.err(&v.span(), "parameters.coupling", format!("must lie in [0, 1], got {coupling}")));
                }
                let index = match &params.index {
                    Some(v) => src.count(v, "parameters.index", 1, size as i64)?,
                    None => 1,
                };
                let probes = match &params.probes {
                    Some(v) => src.count(v, "parameters.probes", 0, 100_000)?,
                    None => 20,
                };
                Job::Minimax { size, gap: (gl, gr), coupling, index, probes }
            }
            Kind::BandEdge => {
                let geo = raw.geometry.map(|g| g.into_inner()).unwrap_or_default();
                let period = match &geo.period {
                    Some(v) => src.positive(v, "geometry.period")?,
                    None => 1.0,
                };
                let cells = match &geo.cells {
                    Some(v) => src.count(v, "geometry.cells", 8, 1 << 16)?,
                    None => 512,
                };
                if cells % 2 != 0 {
                    let v = geo.cells.as_ref().expect("odd default impossible");
                    return Err(src.err(&v.span(), "geometry.cells", "must be even"));
                }
                let v = match &raw.potential {
                    Some(p) => cell_spec(&src, p, "potential", resolve)?,
                    None => CellSpec::Zero,
                };
                let w = match &raw.perturbation {
                    Some(p) => Some(cell_spec(&src, p, "perturbation", resolve)?),
                    None => None,
                };
                let bloch_points = match &params.bloch_points {
                    Some(v) => src.count(v, "parameters.bloch_points", 16, 1 << 16)?,
                    None => 64,
                };
                if bloch_points % 2 != 0 {
                    let v = params.bloch_points.as_ref().expect("default is even");
                    return Err(src.err(&v.span(), "parameters.bloch_points", "must be even"));
                }
                let band_count = match &params.band_count {
                    Some(v) => src.count(v, "parameters.band_count", 1, (cells / 4) as i64)?,
                    None => 4,
                };
                let gap_band = match &params.gap_band {
                    Some(v) => src.count(v, "parameters.gap_band", 1, 1000)?,
                    None => 1,
                };
                let t_max = match &params.t_max {
                    Some(v) => Some(src.positive(v, "parameters.t_max")?),
                    None => None,
                };
                let edge_tolerance = match &params.edge_tolerance {
                    Some(v) => src.positive(v, "parameters.edge_tolerance")?,
                    None => 1e-6,
                };
                Job::Bands {
                    edge_tolerance,
                    period,
                    cells,
                    v,
                    w,
                    bloch_points,
                    band_count,
                    gap_band,
                    indefinite: params.indefinite.unwrap_or(false),
                    kappa: kappa_override,
                    n_dim,
                    t_points,
                    t_max,
                }
            }
            Kind::FullVerify => {
                let profile = match &params.profile {
                    Some(p) => p
                        .get_ref()
                        .parse()
                        .map_err(|e: Error| src.err(&p.span(), "parameters.profile", e))?,
                    None => SizeProfile::Smoke,
                };
                Job::Verify { profile }
            }
        };
        Ok(Self { kind, seed, output_dir, svg: output.svg.unwrap_or(true), job })
    }
}

fn box_geometry(src: &Src, geo: Option<&S<RawGeometry>>, need_delta: bool) -> Result<BoxGeometry> {
    let geo = geo.ok_or_else(|| Error::Config(format!("{}: `geometry` block is required for this kind", src.name)))?;
    let span = geo.span();
    let g = geo.get_ref();
    let lower = src.req(&g.lower, Some(&span), "geometry.lower")?;
    let upper = src.req(&g.upper, Some(&span), "geometry.upper")?;
    if lower.get_ref().is_empty() || lower.get_ref().len() != upper.get_ref().len() {
        return Err(src.err(&upper.span(), "geometry.upper", "must be non-empty and match geometry.lower in length"));
    }
    if lower.get_ref().iter().chain(upper.get_ref()).any(|x| !x.is_finite()) {
        return Err(src.err(&lower.span(), "geometry.lower", "extents must be finite"));
    }
    let gg = match &g.g {
        Some(v) => src.positive(v, "geometry.g")?,
        None => 1.0,
    };
    for (ax, (lo, hi)) in lower.get_ref().iter().zip(upper.get_ref()).enumerate() {
        if hi - lo < gg {
            return Err(src.err(&upper.span(), "geometry.upper", format!("side {ax} is shorter than G = {gg}")));
        }
    }
    let delta = match &g.delta {
        Some(v) => {
            let d = src.positive(v, "geometry.delta")?;
            if d >= 0.5 * gg {
                return Err(src.err(&v.span(), "geometry.delta", format!("must be below G/2 = {}", 0.5 * gg)));
            }
            Some(d)
        }
        None if need_delta => return Err(src.missing(Some(&span), "geometry.delta")),
        None => None,
    };
    let ppu = match &g.points_per_unit {
        Some(v) => src.count(v, "geometry.points_per_unit", 2, 4096)?,
        None => 32,
    };
    let nodes: f64 = lower.get_ref().iter().zip(upper.get_ref()).map(|(l, u)| (u - l) * ppu as f64).product();
    if nodes > 20_000.0 {
        let v = g.points_per_unit.as_ref().map(|v| v.span()).unwrap_or(span);
        return Err(src.err(&v, "geometry.points_per_unit", format!("grid of about {nodes:.0} nodes exceeds the dense limit 20000")));
    }
    Ok(BoxGeometry {
        lower: lower.get_ref().clone(),
        upper: upper.get_ref().clone(),
        g: gg,
        delta,
        points_per_unit: ppu,
        boundary: g.boundary.unwrap_or(Boundary::Dirichlet),
    })
}

fn field_spec(
    src: &Src,
    p: &S<RawPotential>,
    block: &str,
    resolve: impl Fn(&str) -> PathBuf,
    allow_indicator: bool,
) -> Result<FieldSpec> {
    let span = p.span();
    let r = p.get_ref();
    let f = |name: &str| format!("{block}.{name}");
    let amp = |src: &Src| -> Result<f64> { src.finite(src.req(&r.amplitude, Some(&span), &f("amplitude"))?, &f("amplitude")) };
    Ok(match r.kind.get_ref().as_str() {
        "zero" => FieldSpec::Zero,
        "constant" => FieldSpec::Constant(src.finite(src.req(&r.value, Some(&span), &f("value"))?, &f("value"))?),
        "cosine" => FieldSpec::Cosine {
            amplitude: amp(src)?,
            period: match &r.period {
                Some(v) => src.positive(v, &f("period"))?,
                None => 1.0,
            },
            phase: match &r.phase {
                Some(v) => src.finite(v, &f("phase"))?,
                None => 0.0,
            },
        },
        "piecewise-random" => FieldSpec::PiecewiseRandom {
            amplitude: amp(src)?.abs(),
            seed: match &r.seed {
                Some(s) => Some(src.seed(s, &f("seed"))?),
                None => None,
            },
        },
        "csv" => FieldSpec::Csv(resolve(src.req(&r.path, Some(&span), &f("path"))?.get_ref())),
        "indicator" if allow_indicator => {
            FieldSpec::Indicator { theta: src.positive(src.req(&r.theta, Some(&span), &f("theta"))?, &f("theta"))? }
        }
        other => {
            let kinds = if allow_indicator {
                "zero, constant, cosine, piecewise-random, csv or indicator"
            } else {
                "zero, constant, cosine, piecewise-random or csv"
            };
            return Err(src.err(&r.kind.span(), &f("kind"), format!("unknown `{other}`; expected {kinds}")));
        }
    })
}

fn cell_spec(src: &Src, p: &S<RawPotential>, block: &str, resolve: impl Fn(&str) -> PathBuf) -> Result<CellSpec> {
    let span = p.span();
    let r = p.get_ref();
    let f = |name: &str| format!("{block}.{name}");
    let amp = || -> Result<f64> { src.finite(src.req(&r.amplitude, Some(&span), &f("amplitude"))?, &f("amplitude")) };
    Ok(match r.kind.get_ref().as_str() {
        "zero" => CellSpec::Zero,
        "constant" => CellSpec::Constant(src.finite(src.req(&r.value, Some(&span), &f("value"))?, &f("value"))?),
        "cosine" => CellSpec::Cosine(amp()?),
        "sine" => CellSpec::Sine(amp()?),
        "csv" => CellSpec::Csv(resolve(src.req(&r.path, Some(&span), &f("path"))?.get_ref())),
        "indicator" => CellSpec::Ball {
            theta: src.positive(src.req(&r.theta, Some(&span), &f("theta"))?, &f("theta"))?,
            delta: src.positive(src.req(&r.delta, Some(&span), &f("delta"))?, &f("delta"))?,
            center: match &r.center {
                Some(v) => src.finite(v, &f("center"))?,
                None => 0.5,
            },
        },
        other => {
            return Err(src.err(
                &r.kind.span(),
                &f("kind"),
                format!("unknown `{other}`; expected zero, constant, cosine, sine, csv or indicator"),
            ))
        }
    })
}

/// One checked inequality of a scenario run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    #[serde(with = "numfmt")]
    pub value: f64,
    #[serde(with = "numfmt")]
    pub threshold: f64,
    pub pass: bool,
}

fn at_most(name: &str, value: f64, threshold: f64) -> Assertion {
    Assertion { name: name.into(), value, threshold, pass: value <= threshold }
}

fn at_least(name: &str, value: f64, threshold: f64) -> Assertion {
    Assertion { name: name.into(), value, threshold, pass: value >= threshold }
}

fn flag(name: &str, pass: bool) -> Assertion {
    Assertion { name: name.into(), value: if pass { 1.0 } else { 0.0 }, threshold: 1.0, pass }
}

/// Written to `summary.json` after every run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub kind: Kind,
    pub seed: u64,
    pub status: Status,
    pub assertions: Vec<Assertion>,
    pub artifacts: Vec<String>,
}

impl RunSummary {
    /// `0` pass, `1` failed assertion, `2` precondition failed.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::PreconditionFailed => 2,
        }
    }
}

struct Artifacts<'a> {
    dir: &'a Path,
    names: Vec<String>,
}

impl Artifacts<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.names.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }
}

/// Extra knobs from the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Factor applied to every computed lifting constant; 1 in normal runs.
    pub tamper_kappa: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tamper_kappa: 1.0 }
    }
}

/// Runs the scenario and writes its artifacts into `out`.
pub fn run_scenario(sc: &Scenario, out: &Path, opts: RunOptions) -> Result<RunSummary> {
    fs::create_dir_all(out)?;
    let mut art = Artifacts { dir: out, names: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let (assertions, precondition_failed) = match &sc.job {
        Job::Spectrum { geo, v, count, energy } => (run_spectrum(geo, v, *count, *energy, &mut rng, &mut art)?, false),
        Job::Ucp { geo, v, energy, n_dim } => (run_ucp(geo, v, *energy, *n_dim, &mut rng, &mut art)?, false),
        Job::Lift { geo, v, w, energy, n_dim, kappa, t_points } => {
            run_lift(geo, v, w, *energy, *n_dim, *kappa, *t_points, opts, &mut rng, &mut art)?
        }
        Job::Minimax { size, gap, coupling, index, probes } => {
            run_minimax(*size, *gap, *coupling, *index, *probes, &mut rng, &mut art)?
        }
        Job::Bands { .. } => run_bands(sc, opts, &mut art)?,
        Job::Verify { profile } => {
            let results = full_verify(&VerifyOptions { seed: sc.seed, profile: *profile, tamper_kappa: opts.tamper_kappa });
            let mut buf = Vec::new();
            write_suite_csv(&results, &mut buf)?;
            art.write("suites.csv", &buf)?;
            art.json("suites.json", &results)?;
            let a = results.iter().map(|r| flag(&format!("{}/{}", r.module, r.property), r.pass)).collect();
            (a, false)
        }
    };
    let status = if precondition_failed {
        Status::PreconditionFailed
    } else if assertions.iter().all(|a| a.pass) {
        Status::Pass
    } else {
        Status::Fail
    };
    let mut artifacts = art.names.clone();
    artifacts.push("summary.json".into());
    let summary = RunSummary { kind: sc.kind, seed: sc.seed, status, assertions, artifacts };
    art.json("summary.json", &summary)?;
    Ok(summary)
}

fn build_box(geo: &BoxGeometry) -> Result<(AdmissibleDomain, Grid)> {
    let dom = AdmissibleDomain::new(&geo.lower, &geo.upper, geo.g)?;
    let grid = Grid::with_resolution(&dom, geo.points_per_unit, geo.boundary)?;
    Ok((dom, grid))
}

fn build_field(spec: &FieldSpec, dom: &AdmissibleDomain, grid: &Grid, rng: &mut ChaCha8Rng) -> Result<PotentialField> {
    // always draw, so later seeds do not depend on the potential kind
    let drawn: u64 = rng.gen();
    match spec {
        FieldSpec::Zero => Ok(PotentialField::zero(grid)),
        FieldSpec::Constant(c) => Ok(PotentialField::constant(grid, *c)),
        FieldSpec::Cosine { amplitude, period, phase } => PotentialField::cosine(grid, *amplitude, *period, *phase),
        FieldSpec::PiecewiseRandom { amplitude, seed } => {
            PotentialField::piecewise_random(dom, grid, *amplitude, seed.unwrap_or(drawn))
        }
        FieldSpec::Csv(path) => PotentialField::from_csv(grid, path),
        FieldSpec::Indicator { .. } => Err(Error::Config("indicator is only valid as a perturbation".into())),
    }
}

fn run_spectrum(
    geo: &BoxGeometry,
    v: &FieldSpec,
    count: Option<usize>,
    energy: Option<f64>,
    rng: &mut ChaCha8Rng,
    art: &mut Artifacts,
) -> Result<Vec<Assertion>> {
    let (dom, grid) = build_box(geo)?;
    let pot = build_field(v, &dom, &grid, rng)?;
    let h = build_hamiltonian(&dom, &grid, &pot)?;
    let dec = eigendecompose(&h)?;
    let norm = dec.norm().max(f64::MIN_POSITIVE);
    let keep = (0..dec.n())
        .filter(|&k| energy.is_none_or(|e| dec.eigenvalue(k) <= e))
        .take(count.unwrap_or(usize::MAX))
        .collect::<Vec<_>>();

    let exact = if matches!(v, FieldSpec::Zero) && geo.boundary == Boundary::Dirichlet {
        Some(free_dirichlet(&dom, &grid))
    } else {
        None
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    if exact.is_some() {
        w.write_record(["k", "eigenvalue", "exact"])?;
    } else {
        w.write_record(["k", "eigenvalue"])?;
    }
    for &k in &keep {
        let mut row = vec![(k + 1).to_string(), numfmt::cell(dec.eigenvalue(k))];
        if let Some(ex) = &exact {
            row.push(numfmt::cell(ex[k]));
        }
        w.write_record(&row)?;
    }
    art.write("spectrum.csv", &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;

    let mut a = vec![
        at_most("relative_residual", dec.max_residual(&h) / norm, 1e-10),
        at_most("orthogonality_defect", dec.orthogonality_defect(), 1e-10),
    ];
    if let Some(ex) = exact {
        let err = keep.iter().map(|&k| (dec.eigenvalue(k) - ex[k]).abs() / ex[k]).fold(0.0, f64::max);
        a.push(at_most("free_dirichlet_relative_error", err, 1e-10));
    }
    Ok(a)
}

/// Sorted eigenvalues of the discrete Dirichlet Laplacian on the box:
/// sums of `(4/h²) sin²(kπh/2L)` over the axes.
fn free_dirichlet(dom: &AdmissibleDomain, grid: &Grid) -> Vec<f64> {
    let h = grid.h();
    let mut sums = vec![0.0];
    for (ax, &n) in grid.counts().iter().enumerate() {
        let len = dom.length(ax);
        let mu: Vec<f64> = (1..=n)
            .map(|k| 4.0 / (h * h) * (k as f64 * std::f64::consts::PI * h / (2.0 * len)).sin().powi(2))
            .collect();
        sums = sums.iter().flat_map(|s| mu.iter().map(move |m| s + m)).collect();
    }
    sums.sort_by(f64::total_cmp);
    sums
}

fn run_ucp(
    geo: &BoxGeometry,
    v: &FieldSpec,
    energy: f64,
    n_dim: f64,
    rng: &mut ChaCha8Rng,
    art: &mut Artifacts,
) -> Result<Vec<Assertion>> {
    let (dom, grid) = build_box(geo)?;
    let pot = build_field(v, &dom, &grid, rng)?;
    let set = sample_equidistributed(&dom, geo.delta.expect("validated"), rng.gen())?;
    let dec = eigendecompose(&build_hamiltonian(&dom, &grid, &pot)?)?;
    let rep = ucp_verify(&grid, &pot.stats(), &dec, &set, energy, n_dim)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "eigenvalue", "ratio", "c_uc", "critical_n", "pass"])?;
    for s in &rep.samples {
        w.write_record([
            s.k.to_string(),
            numfmt::cell(s.eigenvalue),
            numfmt::cell(s.ratio),
            numfmt::cell(rep.constant.value),
            numfmt::cell(s.critical_n),
            (s.ratio > 0.0 && s.ratio.ln() >= rep.constant.log_value).to_string(),
        ])?;
    }
    art.write("ucp.csv", &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
    art.json("ucp.json", &rep)?;
    Ok(vec![
        at_least("min_log_ratio_minus_log_c_uc", rep.min_ratio.ln() - rep.constant.log_value, 0.0),
        at_least("form_log_min_minus_log_c_uc", rep.form_min.ln() - rep.constant.log_value, 0.0),
        flag("pass_ratios", rep.pass_ratios),
        flag("pass_form", rep.pass_form),
    ])
}

#[allow(clippy::too_many_arguments)]
fn run_lift(
    geo: &BoxGeometry,
    v: &FieldSpec,
    w: &FieldSpec,
    energy: f64,
    n_dim: f64,
    kappa_override: Option<f64>,
    t_points: usize,
    opts: RunOptions,
    rng: &mut ChaCha8Rng,
    art: &mut Artifacts,
) -> Result<(Vec<Assertion>, bool)> {
    let (dom, grid) = build_box(geo)?;
    let pot = build_field(v, &dom, &grid, rng)?;
    let set_seed: u64 = rng.gen();
    let (w_op, k) = match w {
        FieldSpec::Indicator { theta } => {
            let set = sample_equidistributed(&dom, geo.delta.expect("validated"), set_seed)?;
            let k = match kappa_override {
                Some(k) => k,
                None => kappa(dom.dim(), dom.g(), set.delta(), *theta, &pot.stats(), *theta, energy, n_dim)?,
            };
            (set.mask(&grid).as_operator(*theta), k)
        }
        other => {
            let f = build_field(other, &dom, &grid, rng)?;
            (f.as_operator(), kappa_override.expect("validated"))
        }
    };
    let h = build_hamiltonian(&dom, &grid, &pot)?;
    let bottom = verify_bottom_lifting(&h, &w_op, energy, k * opts.tamper_kappa)?;
    let mut certs = vec![bottom];
    let w_min = crate::linalg::eigenvalues(&w_op)?.first().copied().unwrap_or(0.0);
    if w_min >= 0.0 {
        let ts: Vec<f64> = (0..t_points).map(|i| i as f64 / (t_points - 1) as f64).collect();
        certs.push(verify_monotone(&h, &w_op, &ts)?);
    }
    let mut buf = Vec::new();
    lifting::write_csv(&certs, &mut buf)?;
    art.write("lift.csv", &buf)?;
    art.json("lift.json", &certs)?;
    let pre = certs.iter().any(LiftingCertificate::precondition_failed);
    let a = certs
        .iter()
        .map(|c| at_least(&format!("{}-{}_margin", c.tag.as_str(), c.variant), c.margin, -c.tolerance))
        .collect();
    Ok((a, pre))
}

#[derive(Serialize)]
struct MinimaxArtifact<'a> {
    minimax: &'a MinimaxReport,
    automorphism: Option<&'a AutomorphismReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    automorphism_error: Option<String>,
}

fn run_minimax(
    size: usize,
    gap: (f64, f64),
    coupling: f64,
    index: usize,
    probes: usize,
    rng: &mut ChaCha8Rng,
    art: &mut Artifacts,
) -> Result<(Vec<Assertion>, bool)> {
    let a = gapped_matrix(size, (-gap.0, gap.1), 3.0, rng);
    let norm_b = coupling * 0.5 * gap.0.min(gap.1);
    let b: SymmetricMatrix = symmetric_with_norm(size, norm_b, rng);
    let rep = match gls_minimax(&a, &b, 0.0, index, probes, rng) {
        Ok(r) => r,
        Err(Error::InvalidParameter { name, reason }) => {
            return Err(Error::Config(format!("gap-minimax: `{name}`: {reason}")));
        }
        Err(e) => return Err(e),
    };
    let (seel, seel_err) = match automorphism_check(&a, &b, 0.0) {
        Ok(r) => (Some(r), None),
        Err(e @ (Error::Precondition(_) | Error::GammaOnSpectrum { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    art.json("minimax.json", &MinimaxArtifact { minimax: &rep, automorphism: seel.as_ref(), automorphism_error: seel_err })?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "reference", "lower_min", "achievability", "gap", "tolerance", "pass"])?;
    w.write_record([
        rep.n.to_string(),
        numfmt::cell(rep.reference),
        numfmt::cell(rep.probes.lower_min),
        numfmt::cell(rep.probes.achievability),
        numfmt::cell(rep.gap),
        numfmt::cell(rep.tolerance),
        rep.pass.to_string(),
    ])?;
    art.write("minimax.csv", &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;

    let pre = !rep.hypotheses.iter().all(|h| h.pass);
    let mut out = vec![
        at_most("reference_minus_achievability", rep.gap, rep.tolerance),
        at_least("lower_probe_minus_reference", rep.probes.lower_min - rep.reference, -rep.tolerance),
    ];
    if let Some(s) = &seel {
        out.push(at_most("sylvester_residual", s.sylvester_residual, crate::gap::SYLVESTER_TOL));
        out.push(flag("neumann_bound", s.neumann_ok));
    }
    Ok((out, pre))
}

fn build_cell(spec: &CellSpec, period: f64, cells: usize) -> Result<CellPotential> {
    match spec {
        CellSpec::Zero => CellPotential::constant(period, cells, 0.0),
        CellSpec::Constant(c) => CellPotential::constant(period, cells, *c),
        CellSpec::Cosine(a) => CellPotential::cosine(period, cells, *a),
        CellSpec::Sine(a) => CellPotential::sine(period, cells, *a),
        CellSpec::Ball { theta, delta, center } => CellPotential::ball_indicator(period, cells, *center, *delta, *theta),
        CellSpec::Csv(path) => {
            let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
            let mut values = Vec::new();
            for (line, rec) in rdr.records().enumerate() {
                let rec = rec?;
                let field = rec.get(rec.len().saturating_sub(1)).unwrap_or("");
                match field.parse::<f64>() {
                    Ok(x) => values.push(x),
                    Err(_) if line == 0 => continue,
                    Err(e) => return Err(Error::Config(format!("{} line {}: {e}", path.display(), line + 1))),
                }
            }
            if values.len() != cells {
                return Err(Error::GridMismatch(format!(
                    "{} holds {} values, geometry.cells is {cells}",
                    path.display(),
                    values.len()
                )));
            }
            CellPotential::new(period, values)
        }
    }
}

fn run_bands(sc: &Scenario, opts: RunOptions, art: &mut Artifacts) -> Result<(Vec<Assertion>, bool)> {
    let Job::Bands {
        period,
        cells,
        v,
        w,
        bloch_points,
        band_count,
        gap_band,
        indefinite,
        kappa: k_over,
        n_dim,
        t_points,
        t_max,
        edge_tolerance,
    } =
        &sc.job
    else {
        unreachable!("run_bands called for another kind")
    };
    let vc = build_cell(v, *period, *cells)?;
    let bands_needed = (*band_count).max(gap_band + 1);
    let wc = match w {
        Some(spec) => Some(build_cell(spec, *period, *cells)?),
        None => None,
    };
    let settings = TraceSettings { theta_count: *bloch_points, gap_band: *gap_band, indefinite: *indefinite };

    // the band table and the edge trace are independent
    let (bands, trace) = rayon::join(
        || compute_bands(&vc, *bloch_points, bands_needed),
        || -> Result<Option<crate::bands::EdgeTrace>> {
            let Some(wc) = &wc else { return Ok(None) };
            let base = compute_bands(&vc, *bloch_points, gap_band + 1)?;
            let Some((a, b)) = base.gap_above(*gap_band) else { return Ok(None) };
            let w_sup = wc.stats().sup;
            let t0 = if *indefinite { 0.5 } else { 1.0 } * (b - a) / w_sup;
            let k = match (k_over, w) {
                (Some(k), _) => *k,
                (None, Some(CellSpec::Ball { theta, delta, .. })) if !indefinite => {
                    kappa(1, *period, *delta, *theta, &vc.stats(), t0 * w_sup, (2.0 * b - a).max(0.0), *n_dim)?
                }
                _ => 0.0,
            } * opts.tamper_kappa;
            let t_end = t_max.map_or(t0, |m| m.min(t0));
            let ts: Vec<f64> = (0..*t_points).map(|i| t_end * i as f64 / *t_points as f64).collect();
            Ok(Some(trace_edges(&vc, wc, &ts, k, settings)?))
        },
    );
    let bands = bands?;
    let trace = match trace {
        Ok(t) => t,
        Err(Error::Precondition(msg)) => {
            art.json("trace_error.json", &msg)?;
            return Ok((vec![flag("trace_preconditions", false)], true));
        }
        Err(e) => return Err(e),
    };

    let free = matches!(v, CellSpec::Zero);
    write_band_table(&bands, free.then_some(*period), art)?;
    let mut a = Vec::new();
    if free {
        let err = free_edge_error(&bands, *period);
        a.push(at_most("free_edge_relative_error", err, 1e-6));
    } else {
        let checks = cross_check_edges(&vc, &bands)?;
        write_edge_checks(&checks, art)?;
        let worst = checks.iter().map(|c| c.difference).fold(0.0, f64::max);
        a.push(at_most("discriminant_cross_check", worst, *edge_tolerance));
    }
    match (&wc, trace) {
        (Some(_), Some(tr)) => {
            let mut buf = Vec::new();
            tr.write_csv(&mut buf)?;
            art.write("trace.csv", &buf)?;
            art.json("trace.json", &tr)?;
            if sc.svg {
                art.write("trace.svg", tr.to_svg().as_bytes())?;
            }
            a.push(flag("edge_trace_sandwich", tr.pass));
        }
        (Some(_), None) => {
            return Ok((vec![flag(&format!("open_gap_above_band_{gap_band}"), false)], true));
        }
        _ => {}
    }
    Ok((a, false))
}

/// Free bands on a cell of length `L`: band `n` spans `[((n−1)π/L)², (nπ/L)²]`.
fn free_edge_error(bands: &BandFunctions, period: f64) -> f64 {
    let edge = |n: usize| (n as f64 * std::f64::consts::PI / period).powi(2);
    bands
        .intervals
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| {
            let (el, eh) = (edge(i), edge(i + 1));
            ((lo - el).abs() / el.max(1.0)).max((hi - eh).abs() / eh)
        })
        .fold(0.0, f64::max)
}

fn write_band_table(bands: &BandFunctions, free_period: Option<f64>, art: &mut Artifacts) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["band", "lower", "upper", "gap_above"];
    if free_period.is_some() {
        header.extend(["exact_lower", "exact_upper"]);
    }
    w.write_record(&header)?;
    for (i, &(lo, hi)) in bands.intervals.iter().enumerate() {
        let gap = bands.gap_above(i + 1).map_or(0.0, |(a, b)| b - a);
        let mut row = vec![(i + 1).to_string(), numfmt::cell(lo), numfmt::cell(hi), numfmt::cell(gap)];
        if let Some(p) = free_period {
            let e = |n: usize| (n as f64 * std::f64::consts::PI / p).powi(2);
            row.push(numfmt::cell(e(i)));
            row.push(numfmt::cell(e(i + 1)));
        }
        w.write_record(&row)?;
    }
    art.write("bands.csv", &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
}

fn write_edge_checks(checks: &[EdgeCheck], art: &mut Artifacts) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["band", "side", "theta", "band_edge", "discriminant_root", "difference"])?;
    for c in checks {
        w.write_record([
            c.band.to_string(),
            if c.upper { "upper".into() } else { "lower".to_string() },
            numfmt::cell(c.theta),
            numfmt::cell(c.band_edge),
            numfmt::cell(c.discriminant_root),
            numfmt::cell(c.difference),
        ])?;
    }
    art.write("edges.csv", &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
}
