//! Batch front end: read a JSON run configuration, run an analysis or a
//! verdict, and emit JSON or CSV.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{Check, Family, Outcome, Overrides};
pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "ssfinsler",
    version,
    about = "Spherically symmetric Finsler metric lab"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override the tolerance of the selected check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Starting Gauss-Legendre node count.
    #[arg(long, global = true)]
    pub quad: Option<usize>,
    /// Seed for sampled checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate phi, spray, volume and S/u on the configured grid.
    Analyze { config: PathBuf },
    /// Run one verdict.
    Verify {
        config: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
    },
    /// Build a metric from family parameters and write it as a config.
    Construct {
        config: PathBuf,
        #[arg(long, value_enum)]
        family: Family,
    },
    /// Dump the analysis grid as CSV.
    Sample { config: PathBuf },
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text).map_err(|e| CliError {
        message: format!("{}: {}", path.display(), e.message),
        ..e
    })
}

/// Runs a parsed command line. Output routing is left to the caller.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let ov = Overrides {
        tol: cli.tol,
        quad: cli.quad,
        seed: cli.seed,
    };
    let path = match &cli.command {
        Command::Analyze { config }
        | Command::Verify { config, .. }
        | Command::Construct { config, .. }
        | Command::Sample { config } => config,
    };
    if let Some(t) = cli.tol {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::config(format!(
                "--tol: must be positive, got {t}"
            )));
        }
    }
    let mut cfg = load_config(path)?;
    ov.apply(&mut cfg);
    match &cli.command {
        Command::Analyze { .. } => commands::analyze(&cfg),
        Command::Verify { check, .. } => commands::verify(&cfg, *check, ov),
        Command::Construct { family, .. } => commands::construct(&cfg, *family),
        Command::Sample { .. } => commands::sample(&cfg),
    }
}

/// Where the document goes: `--out`, then `output.path`, then stdout.
pub fn destination(cli: &Cli) -> Option<PathBuf> {
    if cli.out.is_some() {
        return cli.out.clone();
    }
    let path = match &cli.command {
        Command::Analyze { config }
        | Command::Verify { config, .. }
        | Command::Construct { config, .. }
        | Command::Sample { config } => config,
    };
    load_config(path).ok()?.output.path.map(PathBuf::from)
}
