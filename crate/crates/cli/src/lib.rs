//! Command-line front end: parses a [`RunConfig`], dispatches one command and
//! emits a JSON report. Exit codes: 0 success, 2 a named constraint or
//! validation failure, 1 malformed input or an internal error.

mod config;
mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use serde_json::{json, Value};
use thiserror::Error;

pub use config::{Command, Quad4, RunConfig};
pub use report::{run, Check, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("malformed config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Parser, Debug)]
#[command(name = "sphere-su2", version, about = "Natural SU(2)-structures on tangent sphere bundles")]
pub struct Cli {
    /// JSON config file; flags override its fields
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunConfig,
}

impl Cli {
    /// The file config (if any) with the flags laid over it.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let Some(path) = &self.config else {
            return Ok(self.run.clone());
        };
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        RunConfig::from_json(&text)?.merged(&self.run)
    }
}

pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Full invocation: parse `args`, run, write the report. Returns the exit code.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let cfg = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            return EXIT_ERROR;
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            let report = json!({
                "command": cfg.command.map(|c| c.name()),
                "status": "error",
                "exit_code": EXIT_ERROR,
                "error": e.to_string(),
            });
            let _ = emit(&report, cfg.out.as_ref(), stdout);
            return EXIT_ERROR;
        }
    };
    if let Err(e) = emit(&outcome.report, cfg.out.as_ref(), stdout) {
        let _ = writeln!(stderr, "{e}");
        return EXIT_ERROR;
    }
    if let Some(v) = outcome.report.get("violation") {
        let _ =
            writeln!(stderr, "violated {}: {}", v["label"].as_str().unwrap_or("?"), v["detail"].as_str().unwrap_or(""));
    }
    outcome.code
}

fn emit(report: &Value, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = render(report);
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}
