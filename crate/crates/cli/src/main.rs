//! Command-line front end: parses configs, runs the engines, and emits
//! figure-ready CSV/JSON.
//!
//! Exit codes: 0 ok, 2 config error, 3 unstable/unsupported regime,
//! 4 numerical failure, 5 truncation budget.

// `!(x > 0.0)`-style validation deliberately treats NaN as invalid.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod run;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::Config;
use output::{Format, Table};
use run::CliError;

#[derive(Parser)]
#[command(
    name = "optocool",
    version,
    about = "Cavity optomechanical cooling toolkit"
)]
struct Cli {
    /// Flat key-value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key (repeatable): --set key=value.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, default_value = "csv")]
    format: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form cooling limits and rates as a quantity/value table.
    Limits,
    /// Sample a spectrum (force, mechanical, or self-energy) over a grid.
    Spectrum,
    /// Integrate the second-moment equations and emit the trajectory.
    Evolve,
    /// Integrate with a kappa(t) dissipation-pulse schedule.
    Modulate,
    /// Evolve the truncated Fock-space density matrix and emit its moments.
    Oracle,
    /// Evaluate the limits table over one or two parameter axes.
    Sweep,
}

fn main() {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("optocool: {}", e.message());
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let format = match cli.format.as_str() {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => {
            return Err(CliError::Config(format!(
                "format '{other}' is not csv|json"
            )))
        }
    };

    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config '{}': {e}", path.display()))
            })?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    for assignment in &cli.sets {
        config.set(assignment)?;
    }

    let table: Table = match cli.command {
        Command::Limits => run::run_limits(&config)?,
        Command::Spectrum => run::run_spectrum(&config)?,
        Command::Evolve => run::run_evolve(&config)?,
        Command::Modulate => run::run_modulate(&config)?,
        Command::Oracle => run::run_oracle(&config)?,
        Command::Sweep => run::run_sweep(&config)?,
    };

    match &cli.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| {
                CliError::Config(format!("cannot write output '{}': {e}", path.display()))
            })?;
            let mut writer = std::io::BufWriter::new(file);
            table
                .write(format, &mut writer)
                .and_then(|_| writer.flush())
                .map_err(|e| CliError::Config(format!("write failed: {e}")))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table
                .write(format, &mut lock)
                .map_err(|e| CliError::Config(format!("write failed: {e}")))?;
        }
    }
    Ok(())
}
