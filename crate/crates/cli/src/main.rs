//! `lzcqed`: single sweeps and parameter scans of the dissipative Landau-Zener model.
//!
//! Exit codes: 0 success, 1 configuration or argument error, 2 solver failure,
//! 3 some points of a parameter scan failed.

mod output;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sweep::Axis;

#[derive(Parser, Debug)]
#[command(name = "lzcqed", version, about = "Dissipative Landau-Zener sweeps of a qubit coupled to a damped oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one sweep; writes timeseries.csv and summary.json.
    Run(RunArgs),
    /// Scan one parameter; writes sweep.csv and sweep_manifest.json.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Parameter file in `key = value` format.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also run the Fock-basis master equation (n_trunc <= 12 only).
    #[arg(long)]
    oracle: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    axis: Axis,
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    /// Grid points, endpoints included (>= 2).
    #[arg(long)]
    points: usize,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => run::execute(&a.common.config, &a.common.out, a.common.oracle),
        Command::Sweep(a) => sweep::execute(&sweep::Request {
            config: a.common.config,
            out: a.common.out,
            oracle: a.common.oracle,
            axis: a.axis,
            from: a.from,
            to: a.to,
            points: a.points,
            threads: a.threads,
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
