//! `hubbard-pt`: sweeps, calibration, oracle dumps, QASM export, gate census
//! and noise runs for the two-site perturbation-theory circuits.
//!
//! Exit codes: 0 success, 2 bad configuration, 3 numerical-contract
//! violation.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum Failure {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Numerical(hubbard_pt::Error),
    #[error("output error: {0}")]
    Io(String),
    #[error("gate census falls outside the tolerance bands")]
    OutOfBand,
}

impl From<hubbard_pt::Error> for Failure {
    fn from(e: hubbard_pt::Error) -> Self {
        use hubbard_pt::Error as E;
        match e {
            E::InvalidArgument(m) => Failure::Config(m),
            E::UnsupportedGate(m) => Failure::Config(format!("unsupported gate: {m}")),
            other => Failure::Numerical(other),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Io(_) => 2,
            Failure::Numerical(_) | Failure::OutOfBand => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hubbard-pt", version, about)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Estimate E1, ψ¹ and E2 over the λ grid (CSV).
    Sweep,
    /// Flag statistics of the energy network on a uniform input (CSV).
    Calibrate,
    /// Spectrum table and classical corrections (JSON).
    Oracle,
    /// Lowered circuit as OpenQASM 2.0.
    ExportQasm,
    /// Gate counts before and after each compilation (JSON).
    Census,
    /// Naive vs optimized compilation under Pauli noise (CSV).
    NoiseRun,
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<(), Failure> {
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = RunConfig::load(&cli.overrides)?;
    let bytes = match cli.verb {
        Verb::Sweep => commands::sweep(&cfg)?,
        Verb::Calibrate => commands::calibrate(&cfg)?,
        Verb::Oracle => commands::oracle(&cfg)?,
        Verb::ExportQasm => commands::export(&cfg)?,
        Verb::NoiseRun => commands::noise_run(&cfg)?,
        Verb::Census => {
            let (bytes, ok) = commands::census(&cfg)?;
            emit(&cfg, &bytes)?;
            if !ok {
                return Err(Failure::OutOfBand);
            }
            return Ok(());
        }
    };
    emit(&cfg, &bytes)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hubbard-pt: {e}");
            ExitCode::from(e.code())
        }
    }
}
