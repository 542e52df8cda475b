//! Command-line front end for the entity-resolution library.

mod commands;
mod config;
mod io;
mod preprocess;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::NumericFailure;

#[derive(Parser)]
#[command(
    name = "resolver",
    version,
    about = "Bayesian entity resolution: fit, simulate, evaluate, diagnose"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model to a dataset described by a TOML config.
    Fit {
        /// Experiment config (TOML).
        config: PathBuf,
        /// Number of independently seeded chains (overrides the config).
        #[arg(long)]
        chains: Option<usize>,
    },
    /// Generate a synthetic household-survey dataset with ground truth.
    Simulate {
        /// Simulation config (TOML).
        config: PathBuf,
    },
    /// Score stored linkage samples against a ground-truth file.
    Evaluate {
        /// links.csv (or links.csv.gz) produced by `fit`.
        #[arg(long)]
        links: PathBuf,
        /// Truth CSV with record_id,entity_id rows.
        #[arg(long)]
        truth: PathBuf,
        /// Output directory (defaults to the links file's directory).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Geweke diagnostics and a tidy trace export for monitored scalars.
    Diagnose {
        /// scalars.csv produced by `fit`.
        #[arg(long)]
        scalars: PathBuf,
        /// Output directory (defaults to the scalars file's directory).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit { config, chains } => commands::fit::run(&config, chains),
        Command::Simulate { config } => commands::simulate::run(&config),
        Command::Evaluate {
            links,
            truth,
            output,
        } => {
            let output = output.unwrap_or_else(|| parent_dir(&links));
            commands::evaluate::run(&links, &truth, &output)
        }
        Command::Diagnose { scalars, output } => {
            let output = output.unwrap_or_else(|| parent_dir(&scalars));
            commands::diagnose::run(&scalars, &output)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<NumericFailure>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn parent_dir(path: &PathBuf) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."))
}
