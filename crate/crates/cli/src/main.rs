//! `qcmc`: command-line front end for the simulation toolkit.

mod args;
mod commands;
mod config;
mod output;

use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    ExitCode::from(run(&argv))
}

/// Parses `argv` (without the program name), runs the command and returns
/// the exit code: 0 on success, 2 on usage errors, 1 on runtime failures.
pub fn run(argv: &[String]) -> u8 {
    let cli = match args::Cli::try_parse_from(std::iter::once("qcmc".to_string()).chain(argv.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli, argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if commands::is_usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}
