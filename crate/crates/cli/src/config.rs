//! Experiment configuration (TOML). Every section is optional and falls
//! back to the baseline scenario; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use aoi_mec_core::optimizer::OptConfig;
use aoi_mec_core::rates::{PlatformProfile, TaskProfile};
use aoi_mec_core::sim::{SimSettings, SplitMode};
use aoi_mec_core::stp::{McStpConfig, RadioConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StpSource {
    ClosedForm,
    MonteCarlo,
}

impl std::str::FromStr for StpSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "closed_form" => Ok(StpSource::ClosedForm),
            "monte_carlo" => Ok(StpSource::MonteCarlo),
            other => Err(format!(
                "unknown STP source `{other}` (expected closed_form or monte_carlo)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioSection {
    /// SIR threshold in dB; converted to a linear ratio before use.
    pub tau_db: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub lambda_b: f64,
    pub p_tx: f64,
}

impl Default for RadioSection {
    fn default() -> Self {
        let r = RadioConfig::default();
        RadioSection {
            tau_db: 0.0,
            alpha: r.alpha,
            epsilon: r.epsilon,
            lambda_b: r.lambda_b,
            p_tx: r.p_tx,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl RadioSection {
    pub fn to_core(&self) -> RadioConfig {
        RadioConfig {
            tau_linear: db_to_linear(self.tau_db),
            alpha: self.alpha,
            epsilon: self.epsilon,
            lambda_b: self.lambda_b,
            p_tx: self.p_tx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskSection {
    pub mean_size_bits: f64,
    pub cycles_per_bit: f64,
    pub tgr: f64,
    pub cor: f64,
}

impl Default for TaskSection {
    fn default() -> Self {
        let t = TaskProfile::default();
        TaskSection {
            mean_size_bits: t.mean_size_bits,
            cycles_per_bit: t.cycles_per_bit,
            tgr: t.tgr,
            cor: t.cor,
        }
    }
}

impl TaskSection {
    pub fn to_core(&self) -> TaskProfile {
        TaskProfile {
            mean_size_bits: self.mean_size_bits,
            cycles_per_bit: self.cycles_per_bit,
            tgr: self.tgr,
            cor: self.cor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlatformSection {
    pub ue_cpu_hz: f64,
    pub bs_cpu_hz: f64,
    pub ues_per_bs: u32,
    pub total_bandwidth_hz: f64,
}

impl Default for PlatformSection {
    fn default() -> Self {
        let p = PlatformProfile::default();
        PlatformSection {
            ue_cpu_hz: p.ue_cpu_hz,
            bs_cpu_hz: p.bs_cpu_hz,
            ues_per_bs: p.ues_per_bs,
            total_bandwidth_hz: p.total_bandwidth_hz,
        }
    }
}

impl PlatformSection {
    pub fn to_core(&self) -> PlatformProfile {
        PlatformProfile {
            ue_cpu_hz: self.ue_cpu_hz,
            bs_cpu_hz: self.bs_cpu_hz,
            ues_per_bs: self.ues_per_bs,
            total_bandwidth_hz: self.total_bandwidth_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    /// Run the simulator alongside the closed forms where an experiment
    /// supports it.
    pub enabled: bool,
    pub n_tasks: usize,
    pub warmup_fraction: f64,
    pub split_mode: SplitMode,
    /// Write the per-task trace of the `sim` experiment.
    pub trace: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        let s = SimSettings::default();
        SimSection {
            enabled: true,
            n_tasks: s.n_tasks,
            warmup_fraction: s.warmup_fraction,
            split_mode: SplitMode::Replicate,
            trace: false,
        }
    }
}

impl SimSection {
    pub fn settings(&self, seed: u64) -> SimSettings {
        SimSettings {
            n_tasks: self.n_tasks,
            warmup_fraction: self.warmup_fraction,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptSection {
    pub beta_bounds: [f64; 2],
    pub xi_bounds: [f64; 2],
    pub stability_margin: f64,
    pub coarse_grid: usize,
    pub tolerance: f64,
    pub max_refinements: usize,
}

impl Default for OptSection {
    fn default() -> Self {
        let o = OptConfig::default();
        OptSection {
            beta_bounds: [o.beta_bounds.0, o.beta_bounds.1],
            xi_bounds: [o.xi_bounds.0, o.xi_bounds.1],
            stability_margin: o.stability_margin,
            coarse_grid: o.coarse_grid,
            tolerance: o.tolerance,
            max_refinements: o.max_refinements,
        }
    }
}

impl OptSection {
    pub fn to_core(&self) -> OptConfig {
        OptConfig {
            beta_bounds: (self.beta_bounds[0], self.beta_bounds[1]),
            xi_bounds: (self.xi_bounds[0], self.xi_bounds[1]),
            stability_margin: self.stability_margin,
            coarse_grid: self.coarse_grid,
            tolerance: self.tolerance,
            max_refinements: self.max_refinements,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub iterations: usize,
    pub window_radius_factor: f64,
}

impl Default for McSection {
    fn default() -> Self {
        let m = McStpConfig::default();
        McSection {
            iterations: m.iterations,
            window_radius_factor: m.window_radius_factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVar {
    #[serde(rename = "tau_db")]
    TauDb,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "xi")]
    Xi,
    #[serde(rename = "n_ues")]
    NUes,
    #[serde(rename = "f_ue")]
    FUe,
    #[serde(rename = "L")]
    TaskSize,
}

impl SweepVar {
    pub fn column(&self) -> &'static str {
        match self {
            SweepVar::TauDb => "tau_db",
            SweepVar::Beta => "beta",
            SweepVar::Xi => "xi",
            SweepVar::NUes => "n_ues",
            SweepVar::FUe => "f_ue",
            SweepVar::TaskSize => "L",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    /// Evenly spaced in decibels, i.e. geometric spacing.
    #[serde(rename = "dB", alias = "db")]
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default = "linear")]
    pub scale: Scale,
}

fn linear() -> Scale {
    Scale::Linear
}

impl SweepAxis {
    pub fn new(variable: SweepVar, start: f64, stop: f64, points: usize) -> Self {
        SweepAxis {
            variable,
            start,
            stop,
            points,
            scale: Scale::Linear,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.points == 0 {
            return Err(CliError::Config("sweep.points must be at least 1".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(CliError::Config("sweep bounds must be finite".into()));
        }
        if self.scale == Scale::Db {
            if self.variable == SweepVar::TauDb {
                return Err(CliError::Config(
                    "tau_db is already in dB; use scale = \"linear\"".into(),
                ));
            }
            if !(self.start > 0.0 && self.stop > 0.0) {
                return Err(CliError::Config("dB-scaled sweeps need positive bounds".into()));
            }
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let at = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        match self.scale {
            Scale::Linear => (0..n).map(|i| self.start + (self.stop - self.start) * at(i)).collect(),
            Scale::Db => {
                let (a, b) = (10.0 * self.start.log10(), 10.0 * self.stop.log10());
                (0..n).map(|i| db_to_linear(a + (b - a) * at(i))).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Defaults to the closed form under full inversion and Monte Carlo
    /// otherwise.
    pub stp_source: Option<StpSource>,
    pub output: PathBuf,
    pub radio: RadioSection,
    pub task: TaskSection,
    pub platform: PlatformSection,
    pub sim: SimSection,
    pub opt: OptSection,
    pub mc_stp: McSection,
    pub sweep: Option<SweepAxis>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            stp_source: None,
            output: PathBuf::from("results"),
            radio: RadioSection::default(),
            task: TaskSection::default(),
            platform: PlatformSection::default(),
            sim: SimSection::default(),
            opt: OptSection::default(),
            mc_stp: McSection::default(),
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn stp_source(&self) -> StpSource {
        self.stp_source.unwrap_or(if self.radio.epsilon == 1.0 {
            StpSource::ClosedForm
        } else {
            StpSource::MonteCarlo
        })
    }

    pub fn mc_config(&self) -> McStpConfig {
        McStpConfig {
            iterations: self.mc_stp.iterations,
            window_radius_factor: self.mc_stp.window_radius_factor,
            seed: aoi_mec_core::rng::derive_seed(self.seed, u64::MAX),
        }
    }
}
