use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod cmd;

/// Signal temporal logic robustness, Lipschitz certificates and
/// barrier-filtered grid-world trials.
#[derive(Debug, Parser)]
#[command(name = "stl-shield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a formula on a sampled signal.
    Eval(EvalArgs),
    /// Print the Lipschitz certificate of a formula.
    Certify(CertifyArgs),
    /// Environment utilities.
    #[command(subcommand)]
    Env(EnvCommand),
    /// Run one closed-loop trial.
    Simulate(SimulateArgs),
    /// Run a batch of trials in parallel.
    Batch(BatchArgs),
}

#[derive(Debug, Args)]
struct FormulaArgs {
    /// Formula text, or a path to a file holding it.
    #[arg(long)]
    formula: String,
    /// JSON file with the predicate declarations.
    #[arg(long)]
    predicates: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    formula: FormulaArgs,
    /// CSV signal with header `t,x1,...,xn`.
    #[arg(long)]
    signal: PathBuf,
    /// Evaluation time (defaults to the signal's first sample).
    #[arg(long)]
    time: Option<f64>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    formula: FormulaArgs,
    /// Diagonal weights `q1,q2,...` (defaults to the identity).
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
enum EnvCommand {
    /// Generate the environment for a seed.
    Gen {
        #[arg(long)]
        seed: u64,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct TrialArgs {
    /// Trial length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Control period in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Basing-signal toggle times `t1,t2,...` in seconds.
    #[arg(long, value_delimiter = ',')]
    basing: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    trial: TrialArgs,
    /// Directory for the trial log.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Seeds as an inclusive range `a..b` (or `a..=b`) or a list `1,5,9`.
    #[arg(long)]
    seeds: String,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    trial: TrialArgs,
    /// Directory for the summary and per-trial logs.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cmd::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cmd::error_code(&e)
        }
    }
}
