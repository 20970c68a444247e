use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cwmeas::config::{parse_config, Scenario};
use cwmeas::scenario::run_scenario;
use cwmeas_core::error::Error;

/// Curie-Weiss quantum measurement simulator.
#[derive(Parser)]
#[command(name = "cwmeas", version, about)]
struct Cli {
    /// Scenario to run
    #[arg(value_enum)]
    scenario: Scenario,

    /// Key-value configuration document
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.dir)
    #[arg(long)]
    out: Option<PathBuf>,

    /// RNG seed (overrides sampling.seed)
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<(), Error> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut config = parse_config(&text, Some(cli.scenario))?;
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let report = run_scenario(&config)?;
    for file in &report.files {
        println!("wrote {}", file.display());
    }
    println!("wrote {}", report.summary_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            if error.is_guard() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
