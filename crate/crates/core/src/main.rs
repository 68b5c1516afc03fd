//! Command-line front end: configure, run, verify, and export experiment
//! data as plot-ready CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rotolab::cli;
use rotolab::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "rotolab", version, about = "Coordinate-minimization laboratory for parametrized quantum circuits")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the per-coordinate sinusoids at the configured point
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// Directory for fit.csv (table also goes to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the optimizer grid and write per-seed trace CSVs plus a summary
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the seed list from the config
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Run the theory checks; exits nonzero if any check fails
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Understate the noise variance tenfold; the descent check must
        /// then fail, demonstrating the suite is not vacuous
        #[arg(long)]
        negative_control: bool,
    },
    /// Emit the synthetic benchmark dataset as CSV
    Dataset {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(args: Args) -> rotolab::error::Result<ExitCode> {
    match args.command {
        Command::Fit { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let table = cli::cmd_fit(&cfg, out.as_deref())?;
            print!("{table}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Optimize { config, out, seeds } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seeds) = seeds {
                cfg.optim.seeds = seeds;
            }
            let files = cli::cmd_optimize(&cfg, &out)?;
            for f in files {
                println!("wrote {}", out.join(f).display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, out, negative_control } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = cli::cmd_verify(&cfg, out.as_deref(), negative_control)?;
            print!("{}", report.to_text());
            if report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Dataset { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let csv = cli::cmd_dataset(&cfg, out.as_deref())?;
            print!("{csv}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
