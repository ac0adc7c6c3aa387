//! `smallness-lab`: thresholds, certified covers and fixtures for small
//! increasing families, from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use smallness_core::{Probability, Rational};

use crate::output::Failure;

#[derive(Parser, Debug)]
#[command(name = "smallness-lab", version, about = "Exact thresholds and certified covers for small increasing families")]
struct Cli {
    /// Worker threads for exhaustive sweeps [default: available parallelism].
    #[arg(long, global = true, env = "SMALLNESS_LAB_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bracket p_c, q_f and q of a family and emit certificates.
    Thresholds(ThresholdsArgs),
    /// Prefix-binomial cover of the heavy sets of a vertex weighting.
    CoverSingleton(SingletonArgs),
    /// Star-forest cover of the dense, small-boundary subgraphs of a graph.
    CoverGraph(GraphArgs),
    /// Full cover of the heavy sets of an edge-weighted graph.
    CoverWeighted(WeightedArgs),
    /// Check q <= q_f <= p_c on random families.
    VerifyChain(ChainArgs),
    /// Emit the built-in instances.
    Fixtures(FixturesArgs),
    /// Re-verify a certificate file.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
pub struct ThresholdsArgs {
    /// Family file: {"n": int, "minimal_sets": [[int, ...], ...]}.
    #[arg(long)]
    pub family: PathBuf,
    /// Bisection tolerance [default: 2^-30].
    #[arg(long, value_parser = rational_arg)]
    pub tol: Option<Rational>,
    /// Directory for the q_f and q certificates.
    #[arg(long)]
    pub cert_dir: Option<PathBuf>,
    /// Replay every written certificate from disk.
    #[arg(long, requires = "cert_dir")]
    pub check: bool,
}

#[derive(Args, Debug)]
pub struct SingletonArgs {
    /// Graph file; vertex weights are half the incident edge weight.
    #[arg(long, required_unless_present = "zeta", conflicts_with = "zeta")]
    pub graph: Option<PathBuf>,
    /// Vertex weights: a JSON array of rationals, or {"zeta": [...]}.
    #[arg(long)]
    pub zeta: Option<PathBuf>,
    #[arg(long, value_parser = probability_arg)]
    pub p: Probability,
    #[arg(long = "J", value_parser = rational_arg)]
    pub j: Rational,
    /// Check coverage of every vertex subset (n <= 20).
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = probability_arg)]
    pub p: Probability,
    #[arg(long = "J", value_parser = rational_arg)]
    pub j: Rational,
    #[arg(long = "T", value_parser = rational_arg)]
    pub t: Rational,
    /// Density parameter [default: |G| p^2].
    #[arg(long, value_parser = rational_arg)]
    pub mu: Option<Rational>,
    /// Check every target subset for a witness (n <= 20).
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug)]
pub struct WeightedArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = probability_arg)]
    pub p: Probability,
    #[arg(long = "R", value_parser = rational_arg)]
    pub r: Rational,
    /// Accept R >= 32 instead of the theorem guard; cost caps are then reported but not asserted.
    #[arg(long)]
    pub reduced_guard: bool,
    /// `exhaustive` (n <= 12) or `sampled:N:SEED`.
    #[arg(long, value_parser = verify_mode_arg)]
    pub verify: Option<VerifyMode>,
}

#[derive(Args, Debug)]
pub struct ChainArgs {
    /// Largest ground set.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long, value_parser = rational_arg)]
    pub tol: Option<Rational>,
}

#[derive(Args, Debug)]
pub struct FixturesArgs {
    /// Write one JSON file per fixture here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also compute the exact minimum cover cost of the necessity examples.
    #[arg(long)]
    pub evaluate: bool,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub certificate: PathBuf,
    /// Family to check against; defaults to the one recorded in the certificate.
    #[arg(long)]
    pub family: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    smallness_core::rational::parse_rational(s).map_err(|e| e.to_string())
}

fn probability_arg(s: &str) -> Result<Probability, String> {
    s.parse::<Probability>().map_err(|e| e.to_string())
}

fn verify_mode_arg(s: &str) -> Result<VerifyMode, String> {
    if s == "exhaustive" {
        return Ok(VerifyMode::Exhaustive);
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["sampled", n, seed] => Ok(VerifyMode::Sampled {
            samples: n.parse().map_err(|_| format!("bad sample count {n:?}"))?,
            seed: seed.parse().map_err(|_| format!("bad seed {seed:?}"))?,
        }),
        _ => Err("expected `exhaustive` or `sampled:N:SEED`".into()),
    }
}

pub struct Context {
    pub workers: usize,
    pub seed: u64,
    pub format: Format,
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let ctx = Context { workers, seed: cli.seed, format: cli.format };
    log::info!("{} workers", ctx.workers);
    let outcome = match cli.command {
        Command::Thresholds(a) => commands::thresholds(&ctx, a)?,
        Command::CoverSingleton(a) => commands::cover_singleton(&ctx, a)?,
        Command::CoverGraph(a) => commands::cover_graph(&ctx, a)?,
        Command::CoverWeighted(a) => commands::cover_weighted(&ctx, a)?,
        Command::VerifyChain(a) => commands::verify_chain(&ctx, a)?,
        Command::Fixtures(a) => commands::fixtures(&ctx, a)?,
        Command::Check(a) => commands::check(&ctx, a)?,
    };
    outcome.emit(ctx.format, cli.output.as_deref())?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return Failure::usage(e.to_string()).report(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => f.report(),
    }
}
