//! `tagree`: evaluate tail bounds for sums of variables that t-agree with a
//! dependency graph, and check them against sampled ensembles.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 a verification run
//! found a bound violation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
#[cfg(test)]
use clap::CommandFactory;

#[derive(Debug, Parser)]
#[command(name = "tagree", version, about = "Tail bounds under t-wise independence and a dependency graph")]
struct Cli {
    /// Worker threads for Monte Carlo trials. Never changes the output.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the headline or Bernoulli tail bound.
    Bound(BoundArgs),
    /// Monte Carlo check of the bounds on a clique-block ensemble.
    Verify(VerifyArgs),
    /// Pattern occurrences in random strings.
    Pattern(PatternArgs),
    /// Color a graph file and report greedy and exact color counts.
    Color(ColorArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Number of variables.
    #[arg(long)]
    pub n: u64,
    /// Independence order (even). Optional with --optimize-t.
    #[arg(long)]
    pub t: Option<u32>,
    /// Deviation: absolute for the headline bound, relative with --p.
    #[arg(long)]
    pub a: f64,
    /// Chromatic number (or an upper bound on it).
    #[arg(long, conflicts_with_all = ["d", "p"])]
    pub chi: Option<u64>,
    /// Maximum degree, Bernoulli mode.
    #[arg(long, requires = "p")]
    pub d: Option<u64>,
    /// Success probability, Bernoulli mode.
    #[arg(long, requires = "d")]
    pub p: Option<f64>,
    /// Scan even t up to --t-max and report the best.
    #[arg(long)]
    pub optimize_t: bool,
    #[arg(long, default_value_t = 20)]
    pub t_max: u32,
    /// Color class sizes, e.g. "3,3,4"; adds the refined bound.
    #[arg(long)]
    pub classes: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Read defaults from a key=value file (a previous CSV works too).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub block_size: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Bernoulli threshold; success probability is p_num / prime.
    #[arg(long, conflicts_with = "p")]
    pub p_num: Option<u64>,
    /// Success probability, rounded to the nearest p_num / prime.
    #[arg(long)]
    pub p: Option<f64>,
    /// Field size; defaults to the smallest prime >= max(blocks, 2t).
    #[arg(long)]
    pub prime: Option<u64>,
    #[arg(long, value_enum)]
    pub flips: Option<FlipsArg>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Comma-separated deviations.
    #[arg(long)]
    pub a_grid: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FlipsArg {
    None,
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternMode {
    Window,
    Subsequence,
}

#[derive(Debug, Args)]
pub struct PatternArgs {
    /// String length.
    #[arg(long, default_value_t = 60)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub alphabet: usize,
    #[arg(long)]
    pub word: String,
    #[arg(long, value_enum, default_value_t = PatternMode::Window)]
    pub mode: PatternMode,
    /// Independence order of the letters.
    #[arg(long, default_value_t = 8)]
    pub t: u32,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Letters come in runs of this length sharing one random value.
    #[arg(long)]
    pub block_size: Option<usize>,
    #[arg(long)]
    pub prime: Option<u64>,
    /// Window mode: deviations for the tail report.
    #[arg(long, default_value = "5,10,15,20,25,30")]
    pub a_grid: String,
    /// Count occurrences in this string instead of sampling.
    #[arg(long)]
    pub text: Option<String>,
    /// Per-trial counts CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Window mode: tail report CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    Natural,
    Degree,
}

#[derive(Debug, Args)]
pub struct ColorArgs {
    /// Graph file: "n m" then m lines "u v".
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = OrderArg::Natural)]
    pub order: OrderArg,
    /// Largest graph for the exact chromatic number.
    #[arg(long, default_value_t = tagree_core::graph::DEFAULT_EXACT_LIMIT)]
    pub vertex_limit: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// How a command failed, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Violations(usize),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || match cli.command {
        Command::Bound(args) => commands::bound(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Pattern(args) => commands::pattern(&args),
        Command::Color(args) => commands::color(&args),
    };
    let result = match cli.threads {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Failure::from(e)),
        },
        None => run(),
    };
    ExitCode::from(exit_status(result))
}

fn exit_status(result: Result<(), Failure>) -> u8 {
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(Failure::Violations(v)) => {
            eprintln!("error: {v} row(s) violate a bound");
            3
        }
    }
}
