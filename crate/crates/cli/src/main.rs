//! `blocky`: generate matrices, build and verify decompositions, run exact
//! oracles, evaluate bounds and drive parameter sweeps.

mod commands;
mod sweep;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status for internal or computational errors. 1 is reserved for
/// verification failures and 2 for usage errors.
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "blocky", version, about = "Blocky and spiky rank workbench")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Input file (matrix, graph, certificate or config, depending on the verb).
    #[arg(long = "in", global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed for every randomized path.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Entrywise tolerance for real comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Field of generated matrices.
    #[arg(long, global = true, value_parser = ["real", "gf2"])]
    pub field: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a matrix (or a graph for `regular`).
    Gen(commands::GenArgs),
    /// Build a decomposition certificate.
    Decompose(commands::DecomposeArgs),
    /// Check a certificate against a matrix; exit 1 on failure.
    Verify(commands::VerifyArgs),
    /// Exact measures at tiny sizes.
    Oracle(commands::OracleArgs),
    /// Evaluate a lower or upper bound.
    Bounds(commands::BoundsArgs),
    /// Run a TOML-configured sweep and emit CSV.
    Sweep(sweep::SweepArgs),
}

/// Bad flags or inputs detected before computing anything.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&cli.global, a),
        Command::Decompose(a) => commands::decompose(&cli.global, a),
        Command::Verify(a) => commands::verify(&cli.global, a),
        Command::Oracle(a) => commands::oracle(&cli.global, a),
        Command::Bounds(a) => commands::bounds(&cli.global, a),
        Command::Sweep(a) => sweep::run(&cli.global, a),
    };
    match result {
        Ok(code) => code,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            eprintln!(
                "usage: blocky <gen|decompose|verify|oracle|bounds|sweep> [flags]; see --help"
            );
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
