//! `pdmsusy`: ladder spectra, oracle solves, SUSY partners and the invariant
//! suite for position-dependent-mass Hamiltonians.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pdmsusy", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ladder potential, formal states and their boundary verdicts.
    Ladder(RunArgs),
    /// Oracle eigenvalues compared with the ladder spectrum.
    Solve(RunArgs),
    /// First-order, non-confluent or confluent SUSY partner.
    Susy(RunArgs),
    /// Run the invariant suite; exit 1 when any check fails.
    Verify(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for confluent `d` sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override a configuration entry, e.g. `--set grid.n_points=8001`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, args) = match &cli.command {
        Command::Ladder(a) => ("ladder", a),
        Command::Solve(a) => ("solve", a),
        Command::Susy(a) => ("susy", a),
        Command::Verify(a) => ("verify", a),
    };
    if args.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let resolved = config::load(&args.config, &args.set)?;
    let dir = commands::out_dir(&resolved, args.out.as_ref());
    let (artifacts, report) = match cli.command {
        Command::Ladder(_) => (commands::ladder(&resolved)?, None),
        Command::Solve(_) => (commands::solve(&resolved)?, None),
        Command::Susy(_) => (commands::susy(&resolved, args.jobs)?, None),
        Command::Verify(_) => {
            let (report, files) = commands::verify(&resolved)?;
            (files, Some(report))
        }
    };
    let written = output::write_all(&dir, &artifacts)?;
    println!("{name}: {} ({} files in {})", resolved.profile, written.len(), dir.display());
    if let Some(report) = report {
        for c in &report.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            println!("{verdict} {:<28} residual {:.3e}  tolerance {:.3e}", c.name, c.residual, c.tolerance);
        }
        let failed = report.failures().count();
        if failed > 0 {
            return Err(CliError::Verification(failed));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pdmsusy: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
