//! `rabi-kzm`: ground states, gaps, quenches and Kibble-Zurek scans of the
//! anisotropic quantum Rabi model.

mod commands;
mod config;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rabi_kzm::RabiError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: RabiError,
    },
    #[error("output error: {0}")]
    Output(String),
    #[error("partial failure: {0}")]
    Partial(String),
}

impl CliError {
    pub fn numerical(context: impl Into<String>, source: RabiError) -> Self {
        Self::Numerical {
            context: context.into(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical { .. } => 3,
            Self::Partial(_) => 4,
            Self::Output(_) => 1,
        }
    }
}

impl From<RabiError> for CliError {
    fn from(e: RabiError) -> Self {
        match e {
            RabiError::Io(_) | RabiError::Csv(_) => Self::Output(e.to_string()),
            e => Self::numerical("run", e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Relax ground states and write their densities.
    Ground,
    /// Analytic and exact-diagonalization gaps across the transition.
    Gap,
    /// Linear quenches through the critical point, one per tau_q.
    Quench,
    /// Freeze-out scan over (lambda, tau_q) and exponent fits.
    Kzscan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ground => "ground",
            Self::Gap => "gap",
            Self::Quench => "quench",
            Self::Kzscan => "kzscan",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rabi-kzm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the `out` key; RABI_KZM_OUT sets the default).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    plots: Option<bool>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = cli.set;
    if let Some(out) = &cli.out {
        overrides.push(format!("out={}", out.display()));
    }
    if let Some(w) = cli.workers {
        overrides.push(format!("workers={w}"));
    }
    if let Some(p) = cli.plots {
        overrides.push(format!("plots={p}"));
    }
    let base: Vec<String> = std::env::var_os("RABI_KZM_OUT")
        .map(|dir| format!("out={}", PathBuf::from(dir).display()))
        .into_iter()
        .collect();
    let resolved = config::load(cli.command, cli.config.as_deref(), &base, &overrides)?;
    commands::run(cli.command, &resolved)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rabi-kzm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
