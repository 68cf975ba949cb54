//! `roadcalc`: service couples, travel-time bounds, simulation checks and
//! network composition from a JSON scenario.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Status;
use config::ScenarioConfig;
use error::CliError;
use output::OutDir;

#[derive(Parser)]
#[command(
    name = "roadcalc",
    version,
    about = "Exact travel-time bounds for ring roads and road trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed of the sim block.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Checks β lifted by one vehicle instead; a working detector must flag it.
    #[arg(long, global = true)]
    negative_control: bool,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Sampled service couples per density (CSV, SVG, JSON)
    Curves,
    /// Average and worst-case travel time over a density sweep
    Bounds,
    /// Randomized check of the couples against the cell simulator
    Simulate,
    /// Per-path service and travel-time bounds on a road network
    Compose,
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = ScenarioConfig::load(path)?;
    let out = OutDir::new(&cli.out);
    match cli.command {
        Command::Curves => commands::curves::run(&cfg, &out),
        Command::Bounds => commands::bounds::run(&cfg, &out),
        Command::Simulate => commands::simulate::run(&cfg, &out, cli.seed, cli.negative_control),
        Command::Compose => commands::compose::run(&cfg, &out),
    }
}

/// `ROADCALC_THREADS` caps the worker pool.
fn init_threads() {
    let Ok(raw) = std::env::var("ROADCALC_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => output::warn(format!("ignoring ROADCALC_THREADS={raw}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match run(&cli) {
        Ok(Status::Clean) => ExitCode::SUCCESS,
        Ok(Status::Violations) => {
            eprintln!("bound violations found, see simulate_summary.json");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
