//! The `lapsum` command line. [`run`] parses arguments, dispatches to a
//! subcommand and renders its report; `main` only prints the outcome.
//!
//! Exit codes: 0 success, 2 invalid input or refused evaluation, 3 budget
//! exceeded, 4 internal consistency failure.

mod commands;
mod output;

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lapsum_core::{Budgets, Error};

pub use output::decimal;

/// Seed used when neither `--seed` nor `LAPSUM_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_101;

#[derive(Parser, Debug)]
#[command(name = "lapsum", version, about = "Diagram counts, exact cumulants and Monte Carlo checks for Laplacian partition functions on random graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Random seed (falls back to LAPSUM_SEED, then a fixed default).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest n for exhaustive graph enumeration.
    #[arg(long, default_value_t = 7, global = true)]
    max_n: usize,
    /// Largest k for diagram weight polynomials.
    #[arg(long, default_value_t = 6, global = true)]
    max_k: usize,
    /// Largest series order / sequence length.
    #[arg(long, default_value_t = 500, global = true)]
    max_order: usize,
    /// Largest q·k for exhaustive diagram enumeration.
    #[arg(long, default_value_t = 12, global = true)]
    max_offspreads: usize,
    /// Largest ground set for set-partition sums.
    #[arg(long, default_value_t = 10, global = true)]
    max_partition_k: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Diagram-count sequences d_k and h_k from every available route.
    Count(commands::CountArgs),
    /// Enumerate diagrams by brute force and compare with the counts.
    Diagrams(commands::DiagramsArgs),
    /// Cumulant coefficient polynomials C_k(p) from diagram weights.
    Weights(commands::WeightsArgs),
    /// Exact moments, cumulants and partition functions over all graphs.
    Exact(commands::ExactArgs),
    /// Monte Carlo estimates of sparse-regime cumulants.
    Mc(commands::McArgs),
    /// Coefficients of D(τ) and guarded free-energy evaluation.
    FreeEnergy(commands::FreeEnergyArgs),
    /// Exact generating-function identity suites.
    Verify(commands::VerifyArgs),
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

pub(crate) struct Context {
    pub budgets: Budgets,
    pub max_order: usize,
    pub seed: u64,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } => 3,
        Error::Consistency(_) => 4,
        _ => 2,
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("LAPSUM_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| format!("LAPSUM_SEED={v:?} is not a 64-bit unsigned integer")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Runs one invocation (`args[0]` is the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let (stdout, stderr) = if code == 0 { (text, String::new()) } else { (String::new(), text) };
            return Outcome { code, stdout, stderr };
        }
    };
    let g = &cli.global;
    let fail = |code: u8, msg: String| Outcome {
        code,
        stdout: String::new(),
        stderr: format!("error: {msg}\n"),
    };
    let seed = match resolve_seed(g.seed) {
        Ok(s) => s,
        Err(m) => return fail(2, m),
    };
    let ctx = Context {
        budgets: Budgets {
            max_partition_k: g.max_partition_k,
            max_offspreads: g.max_offspreads,
            max_weight_k: g.max_k,
            max_histogram_n: g.max_n,
        },
        max_order: g.max_order,
        seed,
    };
    let dispatch = || match &cli.command {
        Command::Count(a) => commands::count(a, &ctx),
        Command::Diagrams(a) => commands::diagrams(a, &ctx),
        Command::Weights(a) => commands::weights(a, &ctx),
        Command::Exact(a) => commands::exact(a, &ctx),
        Command::Mc(a) => commands::mc(a, &ctx),
        Command::FreeEnergy(a) => commands::free_energy(a, &ctx),
        Command::Verify(a) => commands::verify(a, &ctx),
    };
    let result = match g.threads {
        Some(0) => return fail(2, "--threads must be at least 1".into()),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(dispatch),
            Err(e) => return fail(2, format!("cannot start {t} threads: {e}")),
        },
        None => dispatch(),
    };
    match result {
        Ok(report) => {
            let globals = output::global_params(g.format, &ctx);
            Outcome {
                code: report.code,
                stdout: report.render(g.format, globals, seed),
                stderr: report.notes.iter().map(|n| format!("note: {n}\n")).collect(),
            }
        }
        Err(e) => fail(exit_code(&e), e.to_string()),
    }
}
