use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use elastoinverse_cli::{run_command, CliError, Command, RunConfig};

/// Load identification for a vibrating square plate.
#[derive(Debug, Parser)]
#[command(name = "elastoinverse", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Noise seed, overriding `noise.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Write the boundary mesh (and optionally the assembled matrices).
    Mesh,
    /// Simulate the plate response to the configured load.
    Forward,
    /// Reconstruct the load from noisy synthetic measurements.
    Estimate,
    /// Run the L-curve over the configured grid and report the corner.
    Lcurve,
    /// Run the reference scenario matrix and tabulate the errors.
    Sweep,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ELASTOINVERSE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("ELASTOINVERSE_THREADS: expected a positive integer, got \"{raw}\"")))?;
    if n == 0 {
        return Err(CliError::Config("ELASTOINVERSE_THREADS: must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("ELASTOINVERSE_THREADS: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.noise.seed = seed;
    }
    let command = match cli.command {
        Cmd::Mesh => Command::Mesh,
        Cmd::Forward => Command::Forward,
        Cmd::Estimate => Command::Estimate,
        Cmd::Lcurve => Command::Lcurve,
        Cmd::Sweep => Command::Sweep,
    };
    let report = run_command(command, &cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !cli.quiet {
        for line in &report.lines {
            println!("{line}");
        }
        println!("wrote {} files to {}", report.files.len(), cfg.output.dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
