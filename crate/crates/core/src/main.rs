use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use specgap::bands::{compute_bands, CellPotential};
use specgap::lifting::{c_uc, kappa_constant};
use specgap::scenario::{run_scenario, RunOptions, Scenario};
use specgap::schrodinger::PotentialStats;
use specgap::suite::{full_verify, write_suite_csv, SizeProfile, VerifyOptions};

const RUN_HELP: &str = "\
Scenario kinds and their CSV tables (every run also writes summary.json):
  spectrum     spectrum.csv   k, eigenvalue[, exact]
  ucp          ucp.csv        k, eigenvalue, ratio, c_uc, critical_n, pass
  lift         lift.csv       tag, variant, kappa, min_margin, status, pass
  gap-minimax  minimax.csv    n, reference, lower_min, achievability, gap, tolerance, pass
  band-edge    bands.csv      band, lower, upper, gap_above[, exact_lower, exact_upper]
               edges.csv      band, side, theta, band_edge, discriminant_root, difference
               trace.csv      t, f_minus, f_plus, slope_minus, slope_plus, kappa, pass
  full-verify  suites.csv     module, property, cases, failures, worst, measure, pass

Exit status: 0 all assertions pass, 1 an assertion failed or an error
occurred, 2 a precondition failed.";

#[derive(Parser)]
#[command(name = "specgap", version, about = "Spectral lifting and unique continuation verifier")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed overriding the scenario's
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; falls back to the scenario's, then SPECGAP_OUT, then ./specgap-out
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Multiplies every computed lifting constant (negative-control switch)
    #[arg(long, global = true, hide = true, default_value_t = 1.0)]
    tamper_kappa: f64,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Smoke,
    Full,
}

impl From<ProfileArg> for SizeProfile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Smoke => SizeProfile::Smoke,
            ProfileArg::Full => SizeProfile::Full,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML scenario and write its artifacts
    #[command(after_help = RUN_HELP)]
    Run { config: PathBuf },
    /// Run every property suite and write suites.csv / suites.json
    FullVerify {
        #[arg(long, value_enum, default_value = "smoke")]
        profile: ProfileArg,
    },
    /// Print the band table of a 1D periodic potential as CSV
    Bands(BandsArgs),
    /// Evaluate C_uc (and κ when --theta is given)
    Kappa(KappaArgs),
}

#[derive(Args)]
struct BandsArgs {
    /// Cell potential
    #[arg(long, value_enum, default_value = "zero")]
    potential: CellKind,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    period: f64,
    #[arg(long, default_value_t = 512)]
    cells: usize,
    #[arg(long, default_value_t = 64)]
    bloch_points: usize,
    #[arg(long, default_value_t = 4)]
    bands: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum CellKind {
    Zero,
    Cosine,
    Sine,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long)]
    delta: f64,
    /// `min V`
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v_min: f64,
    /// `max V`
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    v_max: f64,
    /// Energy (for κ: the shifted energy s)
    #[arg(long, allow_hyphen_values = true)]
    energy: f64,
    /// Dimension constant N
    #[arg(long, default_value_t = 10.0)]
    n_dim: f64,
    /// Lower bound ϑ of W on S; switches to κ
    #[arg(long)]
    theta: Option<f64>,
    /// `‖W‖_∞` entering κ (defaults to ϑ)
    #[arg(long)]
    w_sup: Option<f64>,
}

fn out_dir(flag: Option<PathBuf>, config: Option<PathBuf>) -> PathBuf {
    flag.or(config)
        .or_else(|| std::env::var_os("SPECGAP_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("specgap-out"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> specgap::Result<u8> {
    let opts = RunOptions { tamper_kappa: cli.tamper_kappa };
    match cli.cmd {
        Command::Run { config } => {
            let mut sc = Scenario::load(&config)?;
            if let Some(s) = cli.seed {
                sc.seed = s;
            }
            let dir = out_dir(cli.out, sc.output_dir.clone());
            let summary = run_scenario(&sc, &dir, opts)?;
            for a in &summary.assertions {
                let mark = if a.pass { "PASS" } else { "FAIL" };
                println!("{mark} {:<40} {:>14.6e} (limit {:e})", a.name, a.value, a.threshold);
            }
            println!("{}: {:?} -> {}", sc.kind.as_str(), summary.status, dir.display());
            Ok(summary.exit_code() as u8)
        }
        Command::FullVerify { profile } => {
            let dir = out_dir(cli.out, None);
            let vo = VerifyOptions { seed: cli.seed.unwrap_or(0), profile: profile.into(), tamper_kappa: opts.tamper_kappa };
            let results = full_verify(&vo);
            std::fs::create_dir_all(&dir)?;
            write_suite_csv(&results, std::fs::File::create(dir.join("suites.csv"))?)?;
            let mut json = serde_json::to_string_pretty(&results)?;
            json.push('\n');
            std::fs::write(dir.join("suites.json"), json)?;
            for r in &results {
                let mark = if r.pass { "PASS" } else { "FAIL" };
                println!("{mark} {:<18} {:<28} {:>5} cases {:>3} failed  worst {:.4e}", r.module, r.property, r.cases, r.failures, r.worst);
            }
            let failed = results.iter().filter(|r| !r.pass).count();
            println!("{} suites, {failed} failed -> {}", results.len(), display(&dir));
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Command::Bands(b) => {
            let v = match b.potential {
                CellKind::Zero => CellPotential::constant(b.period, b.cells, 0.0)?,
                CellKind::Cosine => CellPotential::cosine(b.period, b.cells, b.amplitude)?,
                CellKind::Sine => CellPotential::sine(b.period, b.cells, b.amplitude)?,
            };
            let bf = compute_bands(&v, b.bloch_points, b.bands)?;
            println!("band,lower,upper,gap_above");
            for (i, &(lo, hi)) in bf.intervals.iter().enumerate() {
                let gap = bf.gap_above(i + 1).map_or(0.0, |(a, c)| c - a);
                println!("{},{lo:e},{hi:e},{gap:e}", i + 1);
            }
            Ok(0)
        }
        Command::Kappa(k) => {
            let stats = PotentialStats { min: k.v_min, max: k.v_max, sup: k.v_min.abs().max(k.v_max.abs()) };
            if k.v_min > k.v_max {
                return Err(specgap::Error::Config("--v-min exceeds --v-max".into()));
            }
            match k.theta {
                None => {
                    let c = c_uc(k.dim, k.g, k.delta, &stats, k.energy, k.n_dim)?;
                    println!("lambda_star {:e}", c.lambda_star);
                    println!("exponent {:e}", c.exponent);
                    println!("log_value {:e}", c.log_value);
                    println!("value {:e}", c.value);
                }
                Some(theta) => {
                    let w = k.w_sup.unwrap_or(theta);
                    let kc = kappa_constant(k.dim, k.g, k.delta, theta, &stats, w, k.energy, k.n_dim)?;
                    println!("lambda_star {:e}", kc.constant.lambda_star);
                    println!("exponent {:e}", kc.constant.exponent);
                    println!("log_value {:e}", kc.log_value);
                    println!("value {:e}", kc.value);
                }
            }
            Ok(0)
        }
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}
