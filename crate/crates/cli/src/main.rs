//! Command line front end: generate instances, solve, compare modes,
//! certify results and export meshes.
//!
//! Exit codes: 0 converged (or success), 2 iteration limit, 3 stalled,
//! 1 any error including usage errors and failed certificates.

mod commands;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "vsbenson",
    version,
    about = "Benson-type approximation of convex upper images with vertex selection"
)]
struct Cli {
    /// Worker threads for projection batches (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Approximate the upper image of a problem document.
    Solve(SolveArgs),
    /// Run vertex selection and the baselines side by side.
    Compare(CompareArgs),
    /// Check a stored result against its problem.
    Certify(CertifyArgs),
    /// Write a stored result as an OFF mesh or a CSV of vertices.
    Export(ExportArgs),
    /// Write a generated instance document.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Vs,
    First,
    Random,
}

/// Overrides for the solver tolerances; unset flags keep the defaults.
#[derive(Args, Debug, Clone, Default)]
struct TolArgs {
    #[arg(long = "tol.geom")]
    geom: Option<f64>,
    #[arg(long = "tol.dedupe")]
    dedupe: Option<f64>,
    #[arg(long = "tol.kkt")]
    kkt: Option<f64>,
    #[arg(long = "tol.feas")]
    feas: Option<f64>,
    #[arg(long = "tol.gap")]
    gap: Option<f64>,
    #[arg(long = "tol.cut")]
    cut: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Leave wall-clock times out of the log so reruns are bitwise equal.
    #[arg(long)]
    no_timing: bool,
    /// Skip the Slater and boundedness checks before initialization.
    #[arg(long)]
    no_checks: bool,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Vs)]
    mode: ModeArg,
    /// Seed of the random baseline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result document (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration CSV log, flushed as the run progresses.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Seeds of the random baseline; one row each.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Comparison table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    result: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report document (JSON); printed to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    result: PathBuf,
    /// Problem the result belongs to; supplies the ordering cone (the
    /// natural cone is assumed without it).
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, required_unless_present = "csv", conflicts_with = "csv")]
    off: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Export the outer instead of the inner approximation (clipped to the
    /// same box around the inner vertices).
    #[arg(long)]
    outer: bool,
    /// Bounding box inflation, relative to the extent of the vertices.
    #[arg(long, default_value_t = 0.25)]
    margin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InstanceArg {
    Ellipsoid,
    Disk,
    Truss,
    Enet,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    instance: InstanceArg,
    /// Comma-separated `key=value` pairs, e.g. `a=5` or `m=20,n=50,seed=1`.
    #[arg(long, default_value = "")]
    params: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
