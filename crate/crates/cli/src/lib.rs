//! Command-line front end: argument parsing, commands and output.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use serde_json::{json, Value};
use thiserror::Error;

pub mod args;
pub mod commands;
pub mod input;
pub mod mesh;

use args::{Cli, Command, OutArgs};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] starved_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(starved_core::Error::HypothesisViolation(_)) => EXIT_HYPOTHESIS,
            CliError::Core(_) | CliError::Io(_) => EXIT_SOLVER,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "Io",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

/// Command result before rendering.
#[derive(Debug)]
pub enum Output {
    Json(Value),
    Text(String),
}

impl Output {
    pub fn render(&self) -> String {
        match self {
            Output::Json(v) => serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n",
            Output::Text(t) => t.clone(),
        }
    }
}

fn out_args(cmd: &Command) -> &OutArgs {
    match cmd {
        Command::Lattice(a) => &a.out,
        Command::Classify(a) => &a.common.out,
        Command::Occurs(a) => &a.common.out,
        Command::Atoms(a) => &a.out,
        Command::Subdisc(a) => &a.out,
        Command::Mesh(a) => &a.common.out,
        Command::Verify(a) => &a.common.out,
    }
}

pub fn execute(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::Lattice(a) => commands::lattice(a),
        Command::Classify(a) => commands::classify(a),
        Command::Occurs(a) => commands::occurs(a),
        Command::Atoms(a) => commands::atoms(a),
        Command::Subdisc(a) => commands::subdisc(a),
        Command::Mesh(a) => mesh::mesh(a),
        Command::Verify(a) => commands::verify(a),
    }
}

/// Parses `argv`, runs the command and returns the exit code. Results go to
/// `--out` or `stdout`; errors are reported as JSON on `stdout` and as text
/// on `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let result = execute(&cli.command).and_then(|out| {
        let text = out.render();
        match &out_args(&cli.command).out {
            Some(path) => std::fs::write(path, text)?,
            None => stdout.write_all(text.as_bytes())?,
        }
        Ok(())
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&e.to_json()).expect("JSON values serialize"));
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
