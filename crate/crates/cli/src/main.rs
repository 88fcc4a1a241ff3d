//! `ml-floquet`: command-line access to the orbit, Floquet, long-wave,
//! generalized-system, and direct-simulation analyses, with reproducible
//! file outputs.
//!
//! Every file output is accompanied by a `<file>.manifest.json` sidecar
//! recording the command, parameters, effective tolerances, and wall time.
//! CSV bodies are deterministic: identical invocations produce identical
//! bytes (manifests differ only in the wall-time field).
//!
//! Exit codes: 0 success, 1 usage, 2 domain error, 3 numerical-convergence
//! error.

mod commands;
mod manifest;
mod output;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};
use ml_floquet_core::{CoreError, ErrorKind};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ml-floquet", version, about = "Floquet stability of May-Leonard oscillations")]
struct Cli {
    /// Worker threads for grid-parallel subcommands (fallback:
    /// ML_FLOQUET_JOBS, then all cores). Output ordering is by grid index
    /// regardless of the schedule.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample an exact uniform oscillation to CSV (t, u, v, w).
    Orbit(OrbitArgs),
    /// Period of the orbit with product A, or the inverse map.
    Period(PeriodArgs),
    /// Monodromy matrix and multipliers at one squared wavenumber.
    Monodromy(MonodromyArgs),
    /// Multiplier scan over a wavenumber grid to CSV.
    Scan(ScanArgs),
    /// Long-wave stability parameter by either or both routes.
    Alpha(AlphaArgs),
    /// Critical period, wavenumber, and amplitude of the period-doubling
    /// onset.
    Critical(CriticalArgs),
    /// Periodic orbit and multiplier scan for the generalized system.
    General(GeneralArgs),
    /// Direct simulation of the reaction-diffusion system; strobed mode
    /// amplitudes to CSV.
    Dns(DnsArgs),
}

#[derive(Args, Debug)]
struct OrbitArgs {
    /// Conserved product A in (0, 1/27).
    #[arg(long = "A", value_name = "A", conflicts_with = "t_period")]
    a: Option<f64>,
    /// Period T (> 2 pi sqrt 3); alternative to --A.
    #[arg(long = "T", value_name = "T")]
    t_period: Option<f64>,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug)]
struct PeriodArgs {
    /// Conserved product A.
    #[arg(long = "A", value_name = "A")]
    a: Option<f64>,
    /// Invert: find A from --T.
    #[arg(long, requires = "t_period")]
    invert: bool,
    #[arg(long = "T", value_name = "T")]
    t_period: Option<f64>,
}

#[derive(Args, Debug)]
struct MonodromyArgs {
    #[arg(long = "A", value_name = "A", conflicts_with = "t_period")]
    a: Option<f64>,
    #[arg(long = "T", value_name = "T")]
    t_period: Option<f64>,
    #[arg(long)]
    k2: f64,
    /// Diffusivities as du,dv,dw.
    #[arg(long = "D", value_name = "DU,DV,DW")]
    d: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long = "T", value_name = "T", conflicts_with = "a")]
    t_period: Option<f64>,
    #[arg(long = "A", value_name = "A")]
    a: Option<f64>,
    #[arg(long = "D", value_name = "DU,DV,DW")]
    d: String,
    #[arg(long = "k2-max")]
    k2_max: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug)]
struct AlphaArgs {
    #[arg(long = "A", value_name = "A", required_unless_present = "sweep")]
    a: Option<f64>,
    /// fourier, numeric, or both.
    #[arg(long, default_value = "both")]
    route: String,
    /// Sweep A_min,A_max,n and write the CSV `A,x,alpha_fourier,alpha_numeric`.
    #[arg(long, value_name = "A_MIN,A_MAX,N")]
    sweep: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output path (JSON for single A, CSV for sweeps).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct CriticalArgs {
    #[arg(long = "D", value_name = "DU,DV,DW")]
    d: String,
    #[arg(long = "T-max", default_value_t = 200.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct GeneralArgs {
    /// Competition coefficients a1,a2,a3.
    #[arg(long)]
    alphas: String,
    /// Competition coefficients b1,b2,b3.
    #[arg(long)]
    betas: String,
    /// Seed position on the ray from the coexistence point toward the
    /// u-vertex, in (0, 1).
    #[arg(long = "seed-ray", conflicts_with = "period_target")]
    seed_ray: Option<f64>,
    /// Locate the orbit with this period by bisection on the seed ray.
    #[arg(long = "period-target")]
    period_target: Option<f64>,
    #[arg(long = "k2-max")]
    k2_max: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long = "D", value_name = "DU,DV,DW", default_value = "1,0,0")]
    d: String,
    #[arg(long = "closure-tol", default_value_t = 1e-5)]
    closure_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: String,
}

#[derive(Args, Debug)]
struct DnsArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: String,
    #[arg(long)]
    out: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 1; --help/--version print and exit 0.
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Some(jobs) = cli.jobs.or_else(|| {
        std::env::var("ML_FLOQUET_JOBS")
            .ok()
            .and_then(|s| s.parse().ok())
    }) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }

    let result = match cli.command {
        Command::Orbit(args) => commands::orbit::run(args),
        Command::Period(args) => commands::period::run(args),
        Command::Monodromy(args) => commands::monodromy::run(args),
        Command::Scan(args) => commands::scan::run(args),
        Command::Alpha(args) => commands::alpha::run(args),
        Command::Critical(args) => commands::critical::run(args),
        Command::General(args) => commands::general::run(args),
        Command::Dns(args) => commands::dns::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ml-floquet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// CLI-level error with the documented exit-code mapping.
#[derive(Debug)]
pub enum CliError {
    Domain(String),
    Convergence(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            // Bad inputs and unusable files both count as domain problems.
            CliError::Domain(_) | CliError::Io(_) => 2,
            CliError::Convergence(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::Convergence(m) => write!(f, "convergence error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e.kind() {
            ErrorKind::Domain => CliError::Domain(e.message().to_string()),
            ErrorKind::Convergence => CliError::Convergence(e.message().to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
