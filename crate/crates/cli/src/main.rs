//! `trimstat` command line.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 numeric failure,
//! 3 when a verified bound is violated beyond Monte Carlo error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use clap::error::ErrorKind;

use args::{Cli, Command};

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<trimstat::Error>()) {
        Some(trimstat::Error::Numeric(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    let result = match &cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Ci(a) => commands::ci(a),
        Command::Tune(a) => commands::tune(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify_case(a),
        Command::Violin(a) => commands::violin(a),
    };
    match result {
        Ok(o) if o.violated => ExitCode::from(3),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
