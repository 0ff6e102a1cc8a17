//! `akpz`: experiment driver writing a CSV table and a JSON sidecar per run.

mod config;
mod error;
mod experiments;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use config::{Handles, SimMode, EXPERIMENTS};
use error::CliError;

#[derive(Parser)]
#[command(name = "akpz", version, about = "Numerical experiments for the weakly coupled anisotropic KPZ equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize)]
struct CommonFlags {
    /// Flat JSON config file; flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// CSV output path [default: akpz_<experiment>.csv].
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Master seed [default: 0].
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core [default: 0].
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Bulk diffusion coefficient D(t) from Monte Carlo.
    Dbulk(DbulkFlags),
    /// Resolvent pairing of the truncated generator against its prediction.
    Resolvent(ResolventFlags),
    /// Tables of the scalar recursion G_j.
    Recursions(RecursionsFlags),
    /// Replacement lattice sums against their integrals.
    Replace(ReplaceFlags),
    /// Norms of the truncated observables and variance kernels.
    Norms(NormsFlags),
    /// Quadratic variation of the martingale of a truncated observable.
    Qvvar(QvvarFlags),
    /// Wick pairing counts and the chaos isometry.
    Wick(WickFlags),
    /// Invariant checks; exits with status 6 when any fails.
    Selftest(SelftestFlags),
    /// Runs the experiment named by the "experiment" key of --config.
    Run(RunFlags),
}

#[derive(Args)]
struct RunFlags {
    #[command(flatten)]
    common: CommonFlags,
}

#[derive(Args, Serialize)]
struct DbulkFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: CommonFlags,
    /// Cutoffs, comma separated [default: 8].
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    cutoffs: Option<Vec<u32>>,
    /// Coupling λ̂ [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_hat: Option<f64>,
    /// Time step [default: min(1e-3, 0.1/N²)].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    /// Time horizon [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    /// Replicas [default: 200].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    replicas: Option<usize>,
    /// Record times, comma separated [default: 0.25,0.5,0.75,1].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    record_times: Option<Vec<f64>>,
    /// Nonlinearity evaluation [default: transform].
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<SimMode>,
}

#[derive(Args, Serialize)]
struct ResolventFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: CommonFlags,
    /// Cutoffs, comma separated [default: 4,8,16].
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    cutoffs: Option<Vec<u32>>,
    /// Coupling λ̂ [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_hat: Option<f64>,
    /// Laplace variable μ [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    /// Truncation level [default: 2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Relative residual of the linear solves [default: 1e-8].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    /// Iteration cap of the linear solves [default: 500].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iterations: Option<usize>,
}

#[derive(Args, Serialize)]
struct RecursionsFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: CommonFlags,
    /// Largest recursion index [default: 64].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    j_max: Option<usize>,
    /// Right end of the grid [default: 4.5].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x_max: Option<f64>,
    /// Integration grid step [default: 1e-4].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_step: Option<f64>,
    /// Spacing of the output rows [default: 0.05].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_step: Option<f64>,
}

fn parse_momentum(s: &str) -> Result<[i32; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.trim().parse().map_err(|e| format!("{a}: {e}"))?,
            b.trim().parse().map_err(|e| format!("{b}: {e}"))?,
        ]),
        _ => Err(format!("expected k1,k2, got {s}")),
    }
}

#[derive(Args, Serialize)]
struct ReplaceFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: CommonFlags,
    /// Cutoffs, comma separated [default: 64,256,1024].
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    cutoffs: Option<Vec<u32>>,
    /// Coupling λ̂ [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_hat: Option<f64>,
    /// Laplace variable μ [default: 0].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    /// Momentum k1,k2; repeat for several [default: 1,0].
    #[arg(long = "k", value_parser = parse_momentum, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<Vec<[i32; 2]>>,
    /// Handles H, H⁺ [default: unit].
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    handles: Option<Handles>,
    /// Upper index of the recursion handles [default: 3].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    /// Lower index of the recursion handles [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    i: Option<usize>,
}

#[derive(Args, Serialize)]
struct NormsFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: CommonFlags,
    /// Cutoffs, comma separated [default: 8,16,32].
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    cutoffs: Option<Vec<u32>>,
    /// Coupling λ̂ [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_hat: Option<f64>,
    /// Truncation level [default: 3].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Width of the Gaussian test function [default: 2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
}

#[derive(Args, Serialize)]
struct QvvarFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: CommonFlags,
    /// Cutoffs, comma separated [default: 8,16,32].
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    cutoffs: Option<Vec<u32>>,
    /// Coupling λ̂ [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_hat: Option<f64>,
    /// Truncation level of the observable [default: 2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Time step [default: 1e-3].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    /// Time horizon [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    /// Replicas [default: 300].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    replicas: Option<usize>,
}

#[derive(Args, Serialize)]
struct WickFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: CommonFlags,
    /// Cutoff of the isometry check [default: 4].
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    cutoff: Option<u32>,
    /// Largest order in the pairing-count table [default: 4].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_order: Option<usize>,
    /// Top chaos order of the isometry check [default: 3].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    isometry_order: Option<usize>,
    /// Noise samples of the isometry check [default: 10000].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
}

#[derive(Args, Serialize)]
struct SelftestFlags {
    #[command(flatten)]
    #[serde(skip)]
    common: CommonFlags,
    /// Replicas of the stationarity check [default: 64].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    replicas: Option<usize>,
    /// Breaks the symmetry of the adjointness inputs; the run must then fail.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    corrupt_symmetry: bool,
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("flags serialize")
}

/// Experiment name, common flags and parameter flags of a parsed command.
fn split(cmd: &Command) -> (Option<&'static str>, &CommonFlags, Value) {
    match cmd {
        Command::Dbulk(f) => (Some("dbulk"), &f.common, to_value(f)),
        Command::Resolvent(f) => (Some("resolvent"), &f.common, to_value(f)),
        Command::Recursions(f) => (Some("recursions"), &f.common, to_value(f)),
        Command::Replace(f) => (Some("replace"), &f.common, to_value(f)),
        Command::Norms(f) => (Some("norms"), &f.common, to_value(f)),
        Command::Qvvar(f) => (Some("qvvar"), &f.common, to_value(f)),
        Command::Wick(f) => (Some("wick"), &f.common, to_value(f)),
        Command::Selftest(f) => (Some("selftest"), &f.common, to_value(f)),
        Command::Run(f) => (None, &f.common, Value::Object(Map::new())),
    }
}

fn execute(cmd: &Command) -> Result<(), CliError> {
    let start = Instant::now();
    let (name, common, params) = split(cmd);
    let file = match &common.config {
        Some(path) => config::load_file(path)?,
        None => Map::new(),
    };
    let name = match name {
        Some(n) => n.to_string(),
        None => match config::file_experiment(&file)? {
            Some(n) if EXPERIMENTS.contains(&n.as_str()) => n,
            Some(n) => return Err(CliError::UnknownExperiment(n)),
            None => return error::invalid("run needs --config with an \"experiment\" key"),
        },
    };
    let mut cfg = config::resolve(&name, &file, to_value(common), params)?;
    if cfg.common.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.common.threads)
            .build_global()
            .map_err(|e| CliError::InvalidParameter(format!("threads: {e}")))?;
    }
    let out = cfg.common.out.clone().unwrap_or_else(|| output::default_out(&name));
    cfg.common.out = Some(out.clone());
    let (table, failures) = experiments::run(&cfg)?;
    table.write_csv(&out)?;
    let status = if failures.is_empty() { "ok" } else { "failed" };
    let listed = (!failures.is_empty()).then_some(failures.as_slice());
    let sidecar =
        output::write_sidecar(&out, &name, status, &cfg.to_flat_json(), &table, start.elapsed().as_secs_f64(), listed)?;
    eprintln!("wrote {} ({} rows) and {}", out.display(), table.rows.len(), sidecar.display());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::SelftestFailed(failures.join("; ")))
    }
}

fn main() -> ExitCode {
    let mut cmd = Cli::command();
    for name in EXPERIMENTS {
        cmd = cmd.mut_subcommand(name, |c| c.after_help(output::columns_help(name)));
    }
    let matches = match cmd.try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}
