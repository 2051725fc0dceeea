//! `pdcal`: simulate tilt scans, calibrate a spectrometer from them, and
//! tabulate model diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod config;
pub mod error;
pub mod inspect;
pub mod output;
pub mod simulate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::calibrate::Mode;
use crate::error::CliResult;
use crate::inspect::What;

#[derive(Debug, Parser)]
#[command(name = "pdcal", version, about = "PDC radiometric calibration toolkit")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Treat warnings as failures.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset bundle with its truth file.
    Simulate {
        /// Write a pulse-energy scan at a fixed probe wavelength instead.
        #[arg(long)]
        power_scan: bool,
    },
    /// Relative response or absolute efficiency from a bundle.
    Calibrate {
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Plot-ready diagnostic tables.
    Inspect {
        #[arg(long, value_enum)]
        what: What,
    },
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| error::CliError::Config("--config PATH is required".into()))?;
    let cfg = config::load(path)?;
    let seed = cli.seed.unwrap_or(cfg.config.seed);
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Simulate { power_scan } => simulate::run(&cfg, seed, out, *power_scan),
        Command::Calibrate { mode } => calibrate::run(&cfg, seed, out, *mode, cli.strict),
        Command::Inspect { what } => inspect::run(&cfg, seed, out, *what),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pdcal: {e}");
            e.exit_code()
        }
    }
}
