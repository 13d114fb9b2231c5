//! Command-line front end: argument parsing, run configuration and artifact
//! writing for the `cfbounds` binary.

mod commands;
mod config;
mod output;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use config::CliError;

#[derive(Parser)]
#[command(
    name = "cfbounds",
    version,
    about = "Bounds and point estimates for counterfactual outcome probabilities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized benchmark of the estimators over simulated populations.
    Simulate(commands::SimulateArgs),
    /// Sensitivity sweep over one simulation parameter.
    Sweep(commands::SweepArgs),
    /// Bounds and point estimates from a score file.
    Bounds(commands::BoundsArgs),
    /// Train score models on a campaign CSV and estimate out of fold.
    Estimate(commands::EstimateArgs),
    /// Campaign profit from an estimation report.
    Profit(commands::ProfitArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Profit(a) => commands::profit(a),
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code:
/// 0 success, 1 usage error, 2 invalid input data, 3 runtime failure.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
