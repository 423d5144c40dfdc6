//! Discrete-event simulation of the offloading network with age
//! measurement.
//!
//! All queues are FCFS M/M/1 with unbounded buffers. Per-task random
//! inputs (inter-arrival, routing uniform and one service time per
//! station) are drawn up front in a fixed order, so a seed fixes the whole
//! sample path regardless of routing.
//!
//! Partial offloading has two readings, both available as [`SplitMode`]s:
//! every task is split into a local part and a remote part and completes
//! when both finish ([`SplitMode::Replicate`]), or each task is routed
//! whole to one branch by independent thinning ([`SplitMode::Thin`]).

mod conditionals;
mod engine;
mod sawtooth;
mod trace;

pub use conditionals::{empirical_conditionals, EmpiricalConditionals, Estimate, MIN_CONDITIONAL_SAMPLES};
pub use engine::QueueStats;
pub use sawtooth::{sawtooth_maoi, SawtoothStats, BATCHES};
pub use trace::{write_trace, TRACE_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::check_load;
use crate::error::{Error, Result};
use crate::rates::PartialRates;
use crate::rng::derive_seed;
use engine::{Network, Routing};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub n_tasks: usize,
    /// Fraction of the earliest tasks excluded from all statistics.
    pub warmup_fraction: f64,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            n_tasks: 100_000,
            warmup_fraction: 0.1,
            seed: 1,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_tasks < 100 {
            return Err(Error::InvalidParameter(format!(
                "n_tasks must be at least 100, got {}",
                self.n_tasks
            )));
        }
        if !(0.0..0.5).contains(&self.warmup_fraction) {
            return Err(Error::InvalidParameter(format!(
                "warmup_fraction must lie in [0, 0.5), got {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }

    fn first_measured(&self) -> usize {
        (self.n_tasks as f64 * self.warmup_fraction) as usize
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SimSettings { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Each task feeds both branches; it is delivered when the later
    /// branch finishes.
    Replicate,
    /// Each task goes to the tandem with probability `beta`, else local.
    Thin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub settings: SimSettings,
    pub split_mode: SplitMode,
    pub rates: PartialRates,
    pub xi: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub gen_time: f64,
    pub local_done: Option<f64>,
    pub transmit_done: Option<f64>,
    pub edge_done: Option<f64>,
    /// Latest completion among the branches the task visited.
    pub complete_time: f64,
    pub system_time_max: f64,
    /// Gap to the previous generation (to time zero for the first task).
    pub interarrival: f64,
    /// Local service requirement, when the task visited the local queue.
    pub local_service: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QueueReport {
    pub local: Option<QueueStats>,
    pub transmit: Option<QueueStats>,
    pub edge: Option<QueueStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRun {
    pub records: Vec<TaskRecord>,
    /// Age statistics over the post-warmup records.
    pub sawtooth: SawtoothStats,
    pub queues: QueueReport,
}

impl SimRun {
    /// Records after the warmup prefix.
    pub fn measured<'a>(&'a self, settings: &SimSettings) -> &'a [TaskRecord] {
        &self.records[settings.first_measured()..]
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn execute(net: Network, settings: &SimSettings) -> Result<SimRun> {
    settings.validate()?;
    let draws = engine::draw_tasks(&net, settings.n_tasks, settings.seed);
    let out = engine::run(&net, &draws, settings.first_measured());
    let sawtooth = sawtooth_maoi(&out.records[settings.first_measured()..])?;
    let [local, transmit, edge] = out.queues;
    Ok(SimRun {
        records: out.records,
        sawtooth,
        queues: QueueReport { local, transmit, edge },
    })
}

/// Simulates the partial-offloading network.
///
/// Stability is checked against the arrival rates each queue actually
/// sees: `xi` at every queue when replicating, the thinned rates otherwise.
pub fn simulate_partial(cfg: &SimConfig) -> Result<SimRun> {
    if !(cfg.beta > 0.0 && cfg.beta < 1.0) {
        return Err(Error::NotPartial(cfg.beta));
    }
    positive("xi", cfg.xi)?;
    let PartialRates { mu_l, mu_t, mu_e } = cfg.rates;
    positive("mu_l", mu_l)?;
    positive("mu_t", mu_t)?;
    positive("mu_e", mu_e)?;
    let (local_rate, remote_rate, routing) = match cfg.split_mode {
        SplitMode::Replicate => (cfg.xi, cfg.xi, Routing::Both),
        SplitMode::Thin => (
            (1.0 - cfg.beta) * cfg.xi,
            cfg.beta * cfg.xi,
            Routing::Thin { beta: cfg.beta },
        ),
    };
    check_load("C2 local processor", local_rate / mu_l)?;
    check_load("C3 transmitter", remote_rate / mu_t)?;
    check_load("C4 edge server", remote_rate / mu_e)?;
    execute(
        Network {
            mu_l,
            mu_t,
            mu_e,
            xi: cfg.xi,
            routing,
        },
        &cfg.settings,
    )
}

/// Simulates a single FCFS M/M/1 queue.
pub fn simulate_mm1(mu: f64, xi: f64, settings: &SimSettings) -> Result<SimRun> {
    positive("mu", mu)?;
    positive("xi", xi)?;
    check_load("local processor", xi / mu)?;
    execute(
        Network {
            mu_l: mu,
            mu_t: 1.0,
            mu_e: 1.0,
            xi,
            routing: Routing::LocalOnly,
        },
        settings,
    )
}

/// Simulates the transmitter → edge-server tandem.
pub fn simulate_tandem(mu_t: f64, mu_e: f64, xi: f64, settings: &SimSettings) -> Result<SimRun> {
    positive("mu_t", mu_t)?;
    positive("mu_e", mu_e)?;
    positive("xi", xi)?;
    check_load("transmitter", xi / mu_t)?;
    check_load("edge server", xi / mu_e)?;
    execute(
        Network {
            mu_l: 1.0,
            mu_t,
            mu_e,
            xi,
            routing: Routing::RemoteOnly,
        },
        settings,
    )
}

/// Pooled result of independent replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    /// Total area over total duration.
    pub maoi_hat: f64,
    /// Standard error across replications; NaN for a single run.
    pub stderr: f64,
    pub runs: Vec<SawtoothStats>,
}

/// Runs `reps` replications in parallel, replication `r` seeded with
/// `derive_seed(settings.seed, r)`. The result does not depend on the
/// thread count.
pub fn replicate<F>(settings: &SimSettings, reps: usize, run: F) -> Result<ReplicationSummary>
where
    F: Fn(&SimSettings) -> Result<SimRun> + Sync,
{
    if reps == 0 {
        return Err(Error::InvalidParameter("at least one replication is required".into()));
    }
    let runs: Vec<SawtoothStats> = (0..reps as u64)
        .into_par_iter()
        .map(|r| run(&settings.with_seed(derive_seed(settings.seed, r))).map(|s| s.sawtooth))
        .collect::<Result<_>>()?;
    let area: f64 = runs.iter().map(|s| s.area).sum();
    let duration: f64 = runs.iter().map(|s| s.duration).sum();
    let stderr = if reps > 1 {
        let mean = runs.iter().map(|s| s.maoi_hat).sum::<f64>() / reps as f64;
        let var = runs.iter().map(|s| (s.maoi_hat - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        (var / reps as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(ReplicationSummary {
        maoi_hat: area / duration,
        stderr,
        runs,
    })
}
