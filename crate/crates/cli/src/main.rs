//! `porex` — generate, explore, verify, and benchmark client/server models
//! from the command line.
//!
//! Exit codes: 0 success or verification pass, 1 verification failure,
//! 2 input error, 3 resource limit (including inconclusive verdicts).

mod bench;
mod common;
mod explore;
mod generate;
mod inspect;
mod verify;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "porex",
    version,
    about = "Explicit-state exploration of client/server systems with partial-order reduction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated model in the .csys text format
    Gen(generate::GenArgs),
    /// Explore a model with a preset and print one stats record
    Explore(explore::ExploreArgs),
    /// Explore a model, then audit the result against brute-force checks
    Verify(verify::VerifyArgs),
    /// Run a benchmark matrix and print one CSV row per cell
    Bench(bench::BenchArgs),
    /// Show the heuristic fixpoints step by step on a model's initial state
    Debug(inspect::DebugArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => generate::run(args),
        Command::Explore(args) => explore::run(args),
        Command::Verify(args) => verify::run(args),
        Command::Bench(args) => bench::run(args),
        Command::Debug(args) => inspect::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.code())
        }
    }
}
