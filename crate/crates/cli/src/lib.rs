//! Experiment harness for the MAoI engine: named figure experiments,
//! generic sweeps, optimisation, STP comparison and simulation runs, all
//! written as CSV with a run manifest.

pub mod config;
pub mod error;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiments::{run_experiment, Cell, Experiment, Table};

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    seed: u64,
    stp_source: config::StpSource,
    version: &'a str,
    rows: usize,
    wall_time_s: f64,
    config: &'a ExperimentConfig,
}

/// Paths written by [`run_and_write`].
#[derive(Debug, Clone)]
pub struct Outputs {
    pub table: PathBuf,
    pub manifest: PathBuf,
    pub attachments: Vec<PathBuf>,
}

pub fn write_table(table: &Table, path: &Path) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

/// Runs an experiment and writes `<name>.csv` plus `<name>.manifest.toml`
/// into `cfg.output`.
pub fn run_and_write(exp: Experiment, cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    let start = Instant::now();
    let table = run_experiment(exp, cfg)?;
    let wall = start.elapsed().as_secs_f64();
    fs::create_dir_all(&cfg.output)?;
    let table_path = cfg.output.join(format!("{}.csv", exp.name()));
    write_table(&table, &table_path)?;
    let mut attachments = Vec::new();
    for (name, bytes) in &table.attachments {
        let p = cfg.output.join(name);
        fs::write(&p, bytes)?;
        attachments.push(p);
    }
    let manifest = Manifest {
        experiment: exp.name(),
        seed: cfg.seed,
        stp_source: cfg.stp_source(),
        version: env!("CARGO_PKG_VERSION"),
        rows: table.rows.len(),
        wall_time_s: wall,
        config: cfg,
    };
    let manifest_path = cfg.output.join(format!("{}.manifest.toml", exp.name()));
    let text = toml::to_string(&manifest).map_err(|e| CliError::Config(format!("cannot serialise manifest: {e}")))?;
    fs::write(&manifest_path, text)?;
    Ok(Outputs {
        table: table_path,
        manifest: manifest_path,
        attachments,
    })
}
