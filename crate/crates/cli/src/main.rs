//! `channel-lab`: conversions, convergence sweeps and Gaussian utilities
//! over JSON files.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 validation failure, 3 parse
//! failure (including bad flags).

mod args;
mod convert;
mod gaussian_cmd;
mod io;
mod report;
mod sequence;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use io::{CliError, CliResult, EXIT_PARSE};

#[derive(Parser, Debug)]
#[command(name = "channel-lab", version, about = "Quantum channel representations and convergence sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a channel between Kraus, Stinespring and unitary-dilation form.
    Convert(convert::ConvertArgs),
    /// Sweep a channel sequence and write CSV + JSON reports.
    #[command(subcommand)]
    Sequence(sequence::SequenceCommand),
    /// Gaussian states and channels at the parameter level.
    #[command(subcommand)]
    Gaussian(gaussian_cmd::GaussianCommand),
    /// Re-emit or summarize a stored report.
    Report(report::ReportArgs),
}

const THREADS_VAR: &str = "CHANNEL_LAB_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Parse(format!("{THREADS_VAR}={raw:?}: expected a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Convert(a) => convert::run(a),
        Command::Sequence(c) => sequence::run(c),
        Command::Gaussian(c) => gaussian_cmd::run(c),
        Command::Report(a) => report::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_PARSE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("channel-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_tree_is_consistent() {
        Cli::command().debug_assert();
    }
}
