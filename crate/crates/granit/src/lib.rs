//! Command-line front end for `granit-core`: TOML configuration, a rayon
//! worker pool and CSV/JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pool;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use output::Format;
pub use pool::Pool;

#[derive(Debug, Parser)]
#[command(name = "granit", version, about = "Gravitational resonance spectroscopy simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration file; built-in benchmark defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override a config entry, e.g. --set resonance.f_step_hz=2
    #[arg(long = "set", global = true, value_name = "KEY=VAL")]
    pub overrides: Vec<String>,

    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,

    /// Worker threads [default: $GRANIT_WORKERS, else all cores].
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Bouncer spectrum, matrix elements and required gradients.
    Eigen,
    /// Field and gradient map of the wire array.
    Fieldmap,
    /// Spin-flip probability scan, or a single p(t) trace.
    Adiabaticity,
    /// Resonance curve, peaks and frequency extraction.
    Resonance,
}

/// Validates everything, computes, then writes. Returns the stdout summary.
pub fn run(cli: &Cli) -> Result<String> {
    let cfg = RunConfig::resolve(cli.config.as_deref(), &cli.overrides)?;
    let workers = pool::resolve_workers(cli.workers)?;
    let pool = Pool::new(workers)?;
    let output = match cli.command {
        Command::Eigen => commands::eigen(&cfg)?,
        Command::Fieldmap => commands::fieldmap(&cfg, &pool)?,
        Command::Adiabaticity => commands::adiabaticity(&cfg, &pool)?,
        Command::Resonance => commands::resonance(&cfg, &pool)?,
    };
    let paths = output.write(&cli.out, cli.format)?;
    let mut summary = output.summary();
    for p in paths {
        summary.push_str(&format!("wrote {}\n", p.display()));
    }
    Ok(summary)
}
