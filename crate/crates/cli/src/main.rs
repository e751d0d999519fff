//! `macbc`: rate regions, frontiers, average-rate search, feasibility
//! checks, and Monte Carlo validation for layered superposition coding
//! on the two-user slowly fading Gaussian multiple access channel.
//!
//! Exit codes: 0 success/feasible, 1 check failure, 2 configuration or
//! parse error.

mod commands;
mod emit;
mod settings;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use settings::{CliOpts, Settings};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, flags, or input files.
    Config(String),
    /// Output could not be written.
    Io(String),
    /// Model/region/search error from the library.
    Core(mac_broadcast::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<mac_broadcast::Error> for CliError {
    fn from(e: mac_broadcast::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser)]
#[command(
    name = "macbc",
    version,
    about = "Rate regions and power-allocation search for the layered two-user fading MAC"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-state achievable region at one allocation.
    Region(CliOpts),
    /// Grouped two-layer baseline caps at one allocation.
    Baseline(CliOpts),
    /// Componentwise outer bound at one allocation.
    Outer(CliOpts),
    /// Frontier envelopes over the allocation grid.
    Frontier(CliOpts),
    /// Maximum average rate swept over alpha1 or p.
    Avgrate(CliOpts),
    /// General multi-state region at one allocation.
    Multistate(CliOpts),
    /// Seeded Monte Carlo validation of the average rate.
    Simulate(CliOpts),
    /// Feasibility check of a rates file (exit 1 when infeasible).
    Check(CliOpts),
    /// Reduction check of the general region against the two-state forms.
    ReduceCheck(CliOpts),
}

fn dispatch(cmd: &Command) -> Result<Outcome, CliError> {
    let (name, opts) = match cmd {
        Command::Region(o) => ("region", o),
        Command::Baseline(o) => ("baseline", o),
        Command::Outer(o) => ("outer", o),
        Command::Frontier(o) => ("frontier", o),
        Command::Avgrate(o) => ("avgrate", o),
        Command::Multistate(o) => ("multistate", o),
        Command::Simulate(o) => ("simulate", o),
        Command::Check(o) => ("check", o),
        Command::ReduceCheck(o) => ("reduce-check", o),
    };
    let settings = Settings::resolve(opts)?;
    match name {
        "region" => commands::region(&settings),
        "baseline" => commands::baseline(&settings),
        "outer" => commands::outer(&settings),
        "frontier" => commands::frontier(&settings),
        "avgrate" => commands::avgrate(&settings),
        "multistate" => commands::multistate(&settings),
        "simulate" => commands::simulate(&settings),
        "check" => commands::check(&settings),
        _ => commands::reduce_check(&settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("macbc: {e}");
            ExitCode::from(2)
        }
    }
}
