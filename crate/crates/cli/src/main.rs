//! `darboux2l` command-line tool.
//!
//! Exit status: 0 when every check passed, 1 when a check failed, 2 on a
//! usage, configuration or computation error. Errors are reported on stderr
//! as a single JSON object.

mod config;
mod output;
mod run;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::Parser;
use serde_json::json;

use config::{parse_config, Cli, TOL_ENV};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] darboux2l::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Compute(_) => "computation",
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => "output",
        }
    }
}

fn report_error(err: &CliError) {
    eprintln!("{}", json!({"error": err.kind(), "message": err.to_string()}));
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let env_tol = std::env::var(TOL_ENV).ok();
    let cfg = parse_config(cli, env_tol.as_deref())?;
    let result = run::run(&cfg)?;
    let stderr = io::stderr().lock();
    match &cfg.output {
        Some(path) => output::write(&cfg, &result, BufWriter::new(File::create(path)?), stderr)?,
        None => output::write(&cfg, &result, BufWriter::new(io::stdout().lock()), stderr)?,
    }
    let failed: Vec<&str> = result.reports.iter().filter(|r| !r.passed).map(|r| r.check_name.as_str()).collect();
    if !failed.is_empty() {
        eprintln!("{}", json!({"error": "check_failed", "failed": failed}));
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let mut message = match e.kind() {
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => "missing subcommand".to_string(),
                kind => kind.as_str().unwrap_or("invalid arguments").to_string(),
            };
            for kind in [ContextKind::InvalidArg, ContextKind::InvalidValue, ContextKind::InvalidSubcommand] {
                if let Some(ContextValue::String(token)) = e.get(kind) {
                    message.push_str(&format!(": '{token}'"));
                }
            }
            report_error(&CliError::Usage(message));
            let _ = io::stderr().write_all(e.render().to_string().as_bytes());
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            report_error(&e);
            ExitCode::from(2)
        }
    }
}
