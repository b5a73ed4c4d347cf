use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kantolab_core::demo::DemoName;
use kantolab_core::report::Format;
use kantolab_core::search::DimRange;

mod commands;

use commands::CliError;

/// Exit statuses of the command-line tool.
pub mod exit {
    pub const OK: u8 = 0;
    pub const THEOREM_VIOLATION: u8 = 1;
    pub const BUDGET_EXHAUSTED: u8 = 2;
    pub const CONJECTURE_VIOLATION: u8 = 3;
    pub const USAGE: u8 = 64;
    pub const CORRUPT_STATE: u8 = 65;
    pub const IO: u8 = 74;
}

#[derive(Parser, Debug)]
#[command(name = "kantolab", version, about = "Numerical verification of operator Kantorovich-type inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep statements over random instances and check every certificate.
    Verify(VerifyArgs),
    /// Hunt a counterexample (FALSE statements) or probe tightness (proven ones).
    Search(SearchArgs),
    /// Long-running, checkpointed probe of the Wielandt norm-product conjecture.
    Conjecture(ConjectureArgs),
    /// Evaluate a canonical instance.
    Demo(DemoArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Master seed.
    #[arg(long, env = "KANTOLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Cap on worker threads (results do not depend on it).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
    /// Matrix dimensions, e.g. `2..8`, `3..=5` or `4`.
    #[arg(long, default_value = "2..8")]
    dims: DimRange,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Comma-separated statement ids, or `all`.
    #[arg(long, default_value = "all")]
    statements: String,
    /// Instances per statement.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[command(flatten)]
    common: Common,
    /// Certificate stream destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "jsonl")]
    format: Format,
    /// Also write the JSON run summary here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    statement: String,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Hill-climbing steps applied to the best instance or counterexample.
    #[arg(long, default_value_t = 2000)]
    refine_steps: usize,
    /// Initial relative perturbation size for refinement.
    #[arg(long, default_value_t = 0.1)]
    step_scale: f64,
    #[command(flatten)]
    common: Common,
    /// JSON run summary with the full counterexample or max-ratio instance.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConjectureArgs {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Checkpoint file, rewritten atomically every `--checkpoint-every` instances.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    checkpoint_every: u64,
    /// Continue from the checkpoint if it exists.
    #[arg(long, requires = "checkpoint")]
    resume: bool,
    /// Discard a corrupt or mismatched checkpoint instead of failing.
    #[arg(long)]
    fresh: bool,
    /// Refinement steps at every checkpoint boundary.
    #[arg(long, default_value_t = 200)]
    refine_steps: usize,
    /// Partial-isometry ranks `RX,RY` (random up to n/2 when omitted).
    #[arg(long, value_parser = parse_ranks)]
    ranks: Option<(usize, usize)>,
    #[command(flatten)]
    common: Common,
    /// JSON evidence report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop after this many instances (simulates an interruption).
    #[arg(long, hide = true)]
    halt_after: Option<u64>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    name: DemoName,
    /// Lower spectral bound.
    #[arg(long = "m", default_value_t = 1.0)]
    m: f64,
    /// Upper spectral bound.
    #[arg(long = "M", default_value_t = 4.0)]
    big_m: f64,
    /// JSON run summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_ranks(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected RX,RY")?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad rank `{t}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Verify(a) => commands::verify(a),
        Command::Search(a) => commands::search(a),
        Command::Conjecture(a) => commands::conjecture(a),
        Command::Demo(a) => commands::demo(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("kantolab: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => exit::USAGE,
                CliError::Corrupt(_) => exit::CORRUPT_STATE,
                CliError::Io(..) => exit::IO,
            })
        }
    }
}
