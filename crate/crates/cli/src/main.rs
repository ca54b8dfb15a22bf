mod commands;
mod report;
mod workspace;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mvf_core::values::Value;

use commands::{CheckArgs, EvalArgs, PiArgs, WitnessStrategy};
use report::Format;
use workspace::Workspace;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{file}:{line}: {msg}")]
    Config { file: String, line: usize, msg: String },
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mvf_core::error::Error),
}

/// Exact workbench for metric valued fields.
///
/// Exit codes: 0 yes/success, 1 no, 2 unknown, 3 error.
#[derive(Parser, Debug)]
#[command(name = "mvf", version)]
struct Cli {
    /// Config file with `kind name = expression` lines; repeatable.
    #[arg(long = "config", global = true)]
    config: Vec<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: Format,
    /// Witnesses for quantifiers: grid:<depth>,<height> or list:<name>.
    #[arg(long, global = true, default_value = "grid:2,2")]
    witness: WitnessStrategy,
    /// Precision floor for Hensel roots, as a value literal.
    #[arg(long, global = true, default_value = "1/1000000")]
    floor: Value,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Class C(Δ, l) of a dense field, with the rewrite trace.
    Classify { field: String },
    /// Elementary equivalence of two fields or two field theories.
    Equiv { a: String, b: String },
    /// Evaluate a formula (a declared name, `phi`, or inline text).
    Eval {
        formula: String,
        /// Free-variable assignment `var=<point>`; repeatable.
        #[arg(long = "at")]
        at: Vec<String>,
        #[arg(long)]
        auto: Option<String>,
        /// Concrete field; defaults to Q((t^<2,3>)).
        #[arg(long)]
        field: Option<String>,
    },
    /// Newton iteration for a root of a series polynomial.
    Hensel {
        /// Polynomial in X, e.g. `X^3 - (1 + t^(1/2))`, or `[c0, c1, ...]`.
        poly: String,
        /// Starting approximation whose residue is a simple root.
        start: String,
    },
    /// Check the difference-field axioms on seeded samples.
    Check {
        field: String,
        auto: String,
        #[arg(long, default_value_t = 20)]
        polys: usize,
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
    /// Witness for the n-th condition of the type and phi at it.
    Pi {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 60)]
        bound: u32,
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        auto: Option<String>,
    },
}

fn run(cli: &Cli) -> Result<report::Report, CliError> {
    let ws = Workspace::load(&cli.config)?;
    match &cli.command {
        Command::Classify { field } => commands::classify(&ws, field),
        Command::Equiv { a, b } => commands::equiv(&ws, a, b),
        Command::Eval { formula, at, auto, field } => commands::eval(
            &ws,
            &EvalArgs { formula, at, auto: auto.as_deref(), field: field.as_deref(), witness: &cli.witness },
        ),
        Command::Hensel { poly, start } => commands::hensel(poly, start, &cli.floor),
        Command::Check { field, auto, polys, points } => commands::check(
            &ws,
            &CheckArgs { field, auto, polys: *polys, points: *points, seed: cli.seed },
        ),
        Command::Pi { n, bound, field, auto } => commands::pi(
            &ws,
            &PiArgs { field: field.as_deref(), auto: auto.as_deref(), n: *n, bound: *bound, witness: &cli.witness },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(r) => {
            print!("{}", r.render(cli.format));
            ExitCode::from(r.status.code())
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(3)
        }
    }
}
