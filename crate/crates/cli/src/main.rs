//! `delaunay-lab`: command-line front end for the radial solver.

mod args;
mod commands;
mod failure;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use failure::Failure;

fn execute(cli: Cli) -> Result<commands::Outcome, Failure> {
    let config = cli.command.validate()?;
    if cli.echo_config {
        return Ok(commands::Outcome { stdout: delaunay_core::io::to_json(&config), exit_code: 0 });
    }
    commands::run(&config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(outcome.stdout.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(failure::EXIT_IO as u8);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(f) => {
            eprintln!("{}", f.diagnostic());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
