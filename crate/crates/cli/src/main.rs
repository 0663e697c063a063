mod args;
mod commands;
mod error;
mod output;
mod problem;
mod solve;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Exit status when a slice failed or stopped at its iteration cap.
const EXIT_INCOMPLETE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Gen(a) => commands::gen(a).map(|_| true),
        Command::Bounds(a) => commands::bounds(a).map(|_| true),
        Command::Dos(a) => commands::dos(a).map(|_| true),
        Command::Slice(a) => commands::slice(a).map(|_| true),
        Command::FilterDump(a) => commands::filter_dump(a).map(|_| true),
        Command::Solve(a) => solve::solve(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("sliceeig: some slices failed or did not converge");
            ExitCode::from(EXIT_INCOMPLETE)
        }
        Err(e) => {
            eprintln!("sliceeig: {e}");
            ExitCode::FAILURE
        }
    }
}
