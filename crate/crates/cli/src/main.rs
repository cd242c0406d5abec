//! `sdemoment`: exact moments of polynomial SDEs from the command line.
//!
//! Exit codes: 0 success, 1 usage error or model not pro-solvable (`check`),
//! 2 closure divergence, 3 model error, 4 verification mismatch.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Failure classes mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Model(String),
    Diverged,
    Mismatch(String),
    NotProsolvable,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::NotProsolvable => 1,
            Failure::Diverged => 2,
            Failure::Model(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Model(m) => eprintln!("model error: {m}"),
                Failure::Mismatch(m) => eprintln!("verification failed: {m}"),
                Failure::Diverged | Failure::NotProsolvable => {}
            }
            ExitCode::from(f.code())
        }
    }
}
