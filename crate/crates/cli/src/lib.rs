//! Command-line front end for `bettest-core`.
//!
//! Every command writes one canonical JSON report to stdout (or `--out`).
//! Errors go to stderr as `{error_kind, message, location}` with exit
//! status 2 for invalid input and 3 for numeric failures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod inputs;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::error::{CliError, EXIT_OK, EXIT_VALIDATION};

/// Parses `argv`, runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or_default();
            let first = first.strip_prefix("error: ").unwrap_or(first);
            return report_error(&CliError::usage(first));
        }
    };
    match commands::dispatch(&cli).and_then(|report| emit(&cli, &report.to_canonical_json())) {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(&e),
    }
}

fn emit(cli: &Cli, text: &str) -> error::CliResult<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::from(e).at(path.display().to_string())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn report_error(e: &CliError) -> u8 {
    eprintln!("{}", e.to_json());
    if e.exit_code == EXIT_OK {
        EXIT_VALIDATION
    } else {
        e.exit_code
    }
}
