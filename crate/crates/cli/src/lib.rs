//! Command-line harness for the `hers-core` experiments.
//!
//! Every run resolves a configuration (file, flags, defaults), writes its
//! artifacts into an output directory and finishes with `manifest.json`,
//! which echoes the resolved configuration so the run can be repeated with
//! `hers run --config`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod state;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

pub use config::{Cli, ExperimentConfig, Resolved};
pub use error::{CliError, CliResult};
use output::OutputDir;

/// Resolves and runs one invocation. Returns the stdout summary.
pub fn execute(resolved: &Resolved) -> CliResult<String> {
    let start = Instant::now();
    let mut out = OutputDir::create(&resolved.output)?;
    let result = commands::run(resolved, &mut out);
    let mut outputs = out.written().to_vec();
    outputs.push("manifest.json".into());
    let manifest = json!({
        "tool": "hers",
        "version": env!("CARGO_PKG_VERSION"),
        "command": resolved.command.as_str(),
        "config": resolved.echo(),
        "wall_time_seconds": start.elapsed().as_secs_f64(),
        "status": match &result { Ok(_) => "ok".to_string(), Err(e) => format!("{} error", e.kind()) },
        "outputs": outputs,
    });
    out.json("manifest.json", &manifest)?;
    result
}

/// Parses arguments (and the config file they name), then runs.
pub fn main_with_args<I, T>(args: I) -> CliResult<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(clap_error)?;
    let file = match &cli.config {
        Some(path) => Some(ExperimentConfig::from_path(path)?),
        None => None,
    };
    let resolved = config::resolve(cli, file)?;
    execute(&resolved)
}

fn clap_error(e: clap::Error) -> CliError {
    if e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
        return CliError::usage(
            "missing subcommand (simulate-game, estimate, risk-study, counterexample, verify-appendix, score, run)",
        );
    }
    let rendered = e.render().to_string();
    let first = rendered.lines().next().unwrap_or("invalid arguments");
    CliError::usage(first.trim_start_matches("error: ").to_string())
}
