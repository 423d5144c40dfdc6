use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use aoi_mec_cli::config::StpSource;
use aoi_mec_cli::{run_and_write, CliError, Experiment, ExperimentConfig};

/// Mean age of information experiments for partial-offloading MEC networks.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    experiment: Experiment,

    /// TOML configuration; omitted sections use the baseline scenario.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output`).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// closed_form or monte_carlo.
    #[arg(long)]
    stp_source: Option<StpSource>,
}

fn run(args: Args) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = args.out {
        cfg.output = out;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(src) = args.stp_source {
        cfg.stp_source = Some(src);
    }
    let outputs = run_and_write(args.experiment, &cfg)?;
    println!("{}", outputs.table.display());
    println!("{}", outputs.manifest.display());
    for p in outputs.attachments {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
