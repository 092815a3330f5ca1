//! Command-line front end for the `darkport` library.
//!
//! [`run`] parses arguments, executes one subcommand and writes its report;
//! it returns the process exit code (0 success, 1 bad arguments, 2 numerical
//! failure).

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::config::{Cli, RunConfig};
use crate::error::CliError;

pub use commands::{execute, Outcome};

/// Parse, run, write. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e);
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli) -> Result<(), CliError> {
    let config = RunConfig::from_cli(cli)?;
    let outcome = execute(&config)?;
    let text = outcome.report.render(config.format);
    match &config.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn report_error(e: &CliError) {
    eprintln!("darkport: {e}");
    if let CliError::Numerical(inner) = e {
        if let (Some(module), Some(residual)) = (inner.module(), inner.residual()) {
            eprintln!("darkport: failing module: {module}, residual: {residual:e}");
        }
    }
}
