//! `krf`: configuration-driven runner for the curvature identity suites,
//! cone-monitored reaction ensembles, and torus lattice flows.
//!
//! Exit codes: 0 success, 1 property failure, 2 configuration error,
//! 3 numerical degeneration. Identical config + seed reproduces every
//! output file byte for byte.

mod config;
mod lattice_cmd;
mod ode_cmd;
mod report;
mod snapshot;
mod suites;

use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub(crate) const EXIT_SUCCESS: u8 = 0;
pub(crate) const EXIT_PROPERTY_FAILURE: u8 = 1;
pub(crate) const EXIT_CONFIG_ERROR: u8 = 2;
pub(crate) const EXIT_DEGENERATION: u8 = 3;

#[derive(Debug)]
pub(crate) enum CmdError {
    Config(String),
    Io(PathBuf, std::io::Error),
}

impl CmdError {
    pub(crate) fn io(path: &Path, error: std::io::Error) -> Self {
        CmdError::Io(path.to_path_buf(), error)
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Config(msg) => write!(f, "config error: {msg}"),
            CmdError::Io(path, e) => write!(f, "io error at {}: {e}", path.display()),
        }
    }
}

impl From<config::ConfigError> for CmdError {
    fn from(e: config::ConfigError) -> Self {
        CmdError::Config(e.0)
    }
}

#[derive(Parser)]
#[command(
    name = "krf",
    version,
    about = "Curvature identity suites, cone-monitored reaction ensembles, and torus lattice flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algebraic identity suites and write a JSON report.
    Identities(RunArgs),
    /// Integrate reaction-flow ensembles and report cone monitors.
    Ode(RunArgs),
    /// Run the potential flow on the flat 4-torus.
    Lattice(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; missing keys fall back to defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-path override, e.g. `--set tolerances.cancellation=1e-13`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// RNG seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn dispatch(command: &Command) -> Result<u8, CmdError> {
    let (args, run): (&RunArgs, fn(&config::RunConfig) -> Result<u8, CmdError>) = match command {
        Command::Identities(a) => (a, suites::run),
        Command::Ode(a) => (a, ode_cmd::run),
        Command::Lattice(a) => (a, lattice_cmd::run),
    };
    let cfg = config::load(
        args.config.as_deref(),
        &args.set,
        args.output.as_deref(),
        args.seed,
    )?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CmdError::io(&cfg.output_dir, e))?;
    run(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG_ERROR)
        }
    }
}
