use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use teleport_cli::{execute, Command, Options};

/// Build, verify and simulate finite-dimensional teleportation schemes.
#[derive(Parser)]
#[command(name = "teleport", version)]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Solve for keys and check the recovery identity (exit 1 if it fails).
    Verify(Common),
    /// Verify, then simulate the protocol for the configured number of trials.
    Run(Common),
    /// Print every key with 17 significant digits.
    Keys(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    config: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the verification tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Suppress the human-readable summary on stderr.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, common) = match cli.command {
        Verb::Verify(c) => (Command::Verify, c),
        Verb::Run(c) => (Command::Run, c),
        Verb::Keys(c) => (Command::Keys, c),
    };
    let opts = Options {
        out: common.out,
        seed: common.seed,
        tolerance: common.tolerance,
        quiet: common.quiet,
    };
    match execute(command, &common.config, &opts) {
        Ok(outcome) => {
            if !opts.quiet {
                eprint!("{}", outcome.summary);
            }
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(outcome.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
