//! `conlaw`: run the conservation-law optimizers and baselines from the
//! command line and emit CSV for plotting.

mod commands;
mod config;
mod objectives;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Flags;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or objective parameters. Exit code 2.
    Config(String),
    /// The run produced non-finite values. Exit code 1.
    Diverged(String),
    /// The run completed but found nothing to report. Exit code 1.
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Diverged(_) | CliError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Diverged(m) => write!(f, "diverged: {m}"),
            CliError::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "conlaw", version, about = "Energy-conserving dynamics for optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize from x0 with ade, gd, heavy-ball or nesterov; CSV trace.
    Run(Flags),
    /// Record speed maxima along a frictionless trajectory; CSV of candidates.
    Detect(Flags),
    /// Detect from every start, refine each candidate, report the minima.
    Combined(Flags),
    /// Mode table of the linearized step at x0.
    Analyze(Flags),
}

type Op = fn(config::Config) -> Result<commands::Report, CliError>;

fn execute(cmd: Command) -> Result<(), CliError> {
    let (flags, op): (Flags, Op) = match cmd {
        Command::Run(f) => (f, commands::run),
        Command::Detect(f) => (f, commands::detect),
        Command::Combined(f) => (f, commands::combined),
        Command::Analyze(f) => (f, commands::analyze),
    };
    let report = op(flags.merged()?)?;
    let io_err = |e: std::io::Error| CliError::Config(format!("cannot write output: {e}"));
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match &flags.out {
        Some(path) => {
            std::fs::write(path, &report.body)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            writeln!(out, "{}", report.summary).map_err(io_err)?;
        }
        // the summary rides along as a trailing comment so the stream stays
        // parseable CSV
        None => writeln!(out, "{}# {}", report.body, report.summary).map_err(io_err)?,
    }
    out.flush().map_err(io_err)?;
    report.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("conlaw: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
