//! `reldiv` command-line runner.
//!
//! Exit codes: 0 on success, 1 when a check fails (or on an I/O failure), 2 on a
//! usage or config error.

use std::ffi::OsString;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::{bias, dynamics, oracle};

#[derive(Parser, Debug)]
#[command(name = "reldiv", version, about = "Relativistic f-divergence verification lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact divergence between two distributions.
    Oracle(oracle::OracleArgs),
    /// Evaluate mini-batch estimators on one score batch.
    Estimate(oracle::EstimateArgs),
    /// Check non-negativity, identity and witnessed positivity.
    Axioms(oracle::AxiomsArgs),
    /// Check D_sy <= D_rp <= D_ralf and D_rp <= D_ra.
    Ordering(oracle::OrderingArgs),
    /// Divergences along delta_{1/n} -> delta_0.
    Weakness(oracle::WeaknessArgs),
    /// Bias and variance of an estimator across batch sizes.
    BiasSweep(bias::BiasSweepArgs),
    /// Paired versus all-pairs estimator on the same batches.
    MvueCompare(bias::MvueCompareArgs),
    /// Enumerated least-squares bias against candidate formulas.
    VerifyBias(bias::VerifyBiasArgs),
    /// Critic/generator game trajectory.
    Dynamics(dynamics::DynamicsArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<reldiv::Error> for CliError {
    fn from(e: reldiv::Error) -> Self {
        match e {
            reldiv::Error::WitnessSearch(_) => CliError::Runtime(e.into()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Result of a subcommand that ran to completion.
pub struct Outcome {
    pub failures: usize,
    pub summary: String,
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Oracle(a) => oracle::oracle(a),
        Command::Estimate(a) => oracle::estimate(a),
        Command::Axioms(a) => oracle::axioms(a),
        Command::Ordering(a) => oracle::ordering(a),
        Command::Weakness(a) => oracle::weakness(a),
        Command::BiasSweep(a) => bias::bias_sweep(a),
        Command::MvueCompare(a) => bias::mvue_compare(a),
        Command::VerifyBias(a) => bias::verify_bias(a),
        Command::Dynamics(a) => dynamics::dynamics(a),
    };
    match result {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            if outcome.failures == 0 {
                0
            } else {
                eprintln!("{} check(s) failed", outcome.failures);
                1
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
