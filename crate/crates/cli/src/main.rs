use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcp_cli::{cmd_compare, cmd_rate, cmd_simulate, cmd_theory, ExperimentSpec, FileConfig, Overrides, Result};

/// Phase-coded-pilot synchronization: closed-form predictions, Monte Carlo
/// simulation and their comparison.
#[derive(Debug, Parser)]
#[command(name = "pcp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment file (TOML). Omitted keys take the reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Number of Monte Carlo trials per sweep point.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Base seed of the per-trial random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for the CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form RMSE and CDF (theory_rmse.csv, theory_cdf.csv).
    Theory,
    /// Monte Carlo RMSE and empirical CDF (sim_rmse.csv, sim_cdf.csv).
    Simulate,
    /// Theory against simulation (compare.csv); exits 1 on a tolerance failure.
    Compare,
    /// Computation rates (rate.csv).
    Rate,
}

fn load(cli: &Cli) -> Result<ExperimentSpec> {
    let overrides = Overrides { trials: cli.trials, seed: cli.seed, out: cli.out.clone() };
    match &cli.config {
        Some(path) => pcp_cli::parse_config_with(path, &overrides),
        None => ExperimentSpec::from_file(FileConfig::default(), &overrides),
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let spec = load(cli)?;
    let files = match cli.command {
        Command::Theory => cmd_theory(&spec)?,
        Command::Simulate => cmd_simulate(&spec)?,
        Command::Rate => cmd_rate(&spec)?,
        Command::Compare => {
            let report = cmd_compare(&spec)?;
            let failed = report.rows.iter().filter(|r| !r.passed()).count();
            eprintln!("wrote {}", report.path.display());
            if !report.passed {
                eprintln!("{failed} gated cell(s) outside tolerance");
            }
            return Ok(report.passed);
        }
    };
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
