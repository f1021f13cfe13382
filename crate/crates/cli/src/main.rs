//! Command-line front end: JSON configs in, deterministic CSV reports and
//! CI-friendly exit codes out.

mod commands;
mod config;
mod failure;
mod report;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use failure::Failure;

#[derive(Parser)]
#[command(
    name = "wishart-cone",
    version,
    about = "Existence checks, exact sampling, and Monte-Carlo certification \
             for Wishart distributions with possibly singular scale matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Existence and divisibility verdicts, no sampling
    Check(RunArgs),
    /// Draw a batch and write it as CSV
    Sample(RunArgs),
    /// Certify a batch against the closed-form transform at random probes
    Certify(RunArgs),
    /// Demonstrate convolution roots (rank 1) or report the refusal
    Divide(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Output CSV path; stdout when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Overrides the config's sampling seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Reject certification configs with fewer samples than this
    #[arg(long, value_name = "N")]
    min_samples: Option<usize>,
}

/// Honors WISHART_CONE_THREADS before any parallel work starts.
fn configure_threads() -> Result<(), Failure> {
    let raw = match std::env::var("WISHART_CONE_THREADS") {
        Ok(raw) => raw,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(Failure::invalid(format!("WISHART_CONE_THREADS: {e}"))),
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::invalid(format!(
            "WISHART_CONE_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    if n == 0 {
        return Err(Failure::invalid(
            "WISHART_CONE_THREADS must be a positive integer, got 0".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::invalid(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let result = match &cli.command {
        Command::Check(args) => commands::cmd_check(&args.config, args.seed),
        Command::Sample(args) => {
            commands::cmd_sample(&args.config, args.out.as_deref(), args.seed)
        }
        Command::Certify(args) => commands::cmd_certify(
            &args.config,
            args.out.as_deref(),
            args.seed,
            args.min_samples,
        ),
        Command::Divide(args) => {
            commands::cmd_divide(&args.config, args.out.as_deref(), args.seed)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
