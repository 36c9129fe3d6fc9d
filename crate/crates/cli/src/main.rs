//! `mzfaber` experiment runner.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 numerical
//! failure in at least one run, 3 regression found by `compare`.

mod compare;
mod config;
mod pipeline;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<mzfaber::Error> for CliError {
    fn from(e: mzfaber::Error) -> Self {
        use mzfaber::Error as E;
        match e {
            E::InvalidArgument(_) | E::DimensionMismatch(_) | E::Parse(_) | E::NotSquare { .. } => {
                CliError::Config(e.to_string())
            }
            E::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "mzfaber", version, about = "Memory-kernel expansions and GLE solves for linear benchmark systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernels, GLE trajectories, oracle and error tables for every (family, order).
    Run { config: PathBuf },
    /// Diff two reports; exits 3 when `b` is worse than `a` beyond the tolerance.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
    },
    /// Kernel coefficient tables only.
    Kernel { config: PathBuf },
    /// Reference trajectory only.
    Oracle { config: PathBuf },
}

fn print_json<T: serde::Serialize>(v: &T) {
    let text = serde_json::to_string_pretty(v).expect("serializable");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (summary, failed) = pipeline::run(&cfg)?;
            report_runs(&summary.runs);
            Ok(if failed { 2 } else { 0 })
        }
        Command::Kernel { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (summary, failed) = pipeline::kernels_only(&cfg)?;
            report_runs(&summary.runs);
            Ok(if failed { 2 } else { 0 })
        }
        Command::Oracle { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = pipeline::oracle_only(&cfg)?;
            eprintln!("oracle written to {}", out.display());
            Ok(0)
        }
        Command::Compare { a, b, tolerance } => {
            if !(tolerance >= 0.0) {
                return Err(CliError::Config(format!("tolerance must be >= 0, got {tolerance}")));
            }
            let c = compare::compare(&a, &b, tolerance)?;
            print_json(&c);
            Ok(if c.regressions > 0 { 3 } else { 0 })
        }
    }
}

fn report_runs(runs: &[pipeline::RunRecord]) {
    for r in runs {
        match (&r.message, r.max_error) {
            (Some(m), _) => eprintln!("{:>8} n={:<3} FAILED: {m}", r.family, r.order),
            (None, Some(e)) => eprintln!("{:>8} n={:<3} max error {e:.3e}", r.family, r.order),
            (None, None) => eprintln!("{:>8} n={:<3} ok", r.family, r.order),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mzfaber: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
