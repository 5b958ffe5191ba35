//! `tumorflow`: steady states, spectra and boundary evolution from the command line.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 the evolved
//! shape left the admissible neighbourhood.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "tumorflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady radius R_A, alpha_A and the v0 profile.
    Steady(Overrides),
    /// Symbol table mu_k, thresholds G_k, G*, l_G and stability class.
    Spectrum(Overrides),
    /// Linear or nonlinear boundary evolution from a seed shape.
    Evolve(Overrides),
    /// Boundary ratios, series equivalence and ratio decay for f = identity, R_A = 1.
    AppendixCheck(Overrides),
    /// Spectrum summaries over lists of A and G values.
    Sweep(Overrides),
}

fn run(cmd: &Command) -> error::CliResult<()> {
    match cmd {
        Command::Steady(o) => commands::steady(&RunConfig::resolve(o)?),
        Command::Spectrum(o) => commands::spectrum(&RunConfig::resolve(o)?),
        Command::Evolve(o) => commands::evolve(&RunConfig::resolve(o)?),
        Command::AppendixCheck(o) => commands::appendix_check(&RunConfig::resolve(o)?),
        Command::Sweep(o) => commands::sweep(&RunConfig::resolve(o)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
