use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fbcap::cli::Cli;
use fbcap::commands::{execute, render};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("fbcap: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match render(&outcome, cli.format) {
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
        Err(e) => {
            eprintln!("fbcap: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    if let Some(e) = &outcome.failure {
        eprintln!("fbcap: {e}");
    }
    ExitCode::from(outcome.exit_code() as u8)
}
