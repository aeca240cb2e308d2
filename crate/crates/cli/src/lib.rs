//! Command-line front end for the `uqbench` engine.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when a computation is
//! undefined on the given data. Errors are printed to stderr as JSON.

pub mod args;
mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNDEFINED: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] uqbench::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_undefined() => EXIT_UNDEFINED,
            _ => EXIT_INPUT,
        }
    }
}

fn error_json(code: &str, message: &str) -> String {
    json!({ "error": code, "message": message }).to_string()
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T, O, E>(argv: I, stdout: &mut O, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            let _ = writeln!(stderr, "{}", error_json("usage", first));
            return EXIT_INPUT;
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => commands::eval(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Cood(a) => commands::cood(a),
        Command::Compare(a) => commands::compare(a),
        Command::Oracle(a) => commands::oracle_cmd(a),
    };
    match result {
        Ok(outcome) => {
            let _ = commands::print_document(stdout, &outcome.document);
            if outcome.undefined.is_empty() {
                EXIT_OK
            } else {
                let _ = writeln!(
                    stderr,
                    "{}",
                    json!({
                        "error": "undefined",
                        "message": "some metrics are undefined on this input",
                        "metrics": outcome.undefined,
                    })
                );
                EXIT_UNDEFINED
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_json(e.code(), &e.to_string()));
            e.exit_code()
        }
    }
}
