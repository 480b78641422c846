mod config;
mod run;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, RunConfig};

/// Failure classes mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Parameters fail validation, or a solve did not converge (exit 1).
    Failed(String),
    /// Unreadable or inconsistent input (exit 2).
    Malformed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Malformed(_) => 2,
        }
    }
}

impl From<ckn_core::Error> for CliError {
    fn from(err: ckn_core::Error) -> Self {
        match err {
            ckn_core::Error::InvalidParams { .. }
            | ckn_core::Error::Degenerate(_)
            | ckn_core::Error::Supercritical(_) => CliError::Failed(err.to_string()),
            _ => CliError::Malformed(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = RunConfig::resolve(cli).and_then(|config| run::run(&config));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Failed(msg) | CliError::Malformed(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(err.code())
        }
    }
}
