//! Physical parameters to queueing service rates.
//!
//! Units are fixed: bits, Hz (cycles per second for CPUs), seconds and tasks
//! per second. Bandwidth and edge compute are split equally among the UEs
//! of a base station.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-UE task statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskProfile {
    /// Mean task size in bits.
    pub mean_size_bits: f64,
    pub cycles_per_bit: f64,
    /// Task generation rate in tasks per second.
    pub tgr: f64,
    /// Computing offloading ratio, the share handled at the edge.
    pub cor: f64,
}

impl Default for TaskProfile {
    fn default() -> Self {
        Self {
            mean_size_bits: 2e6,
            cycles_per_bit: 900.0,
            tgr: 0.2,
            cor: 0.4,
        }
    }
}

impl TaskProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mean task size", self.mean_size_bits),
            ("cycles per bit", self.cycles_per_bit),
            ("task generation rate", self.tgr),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.cor) {
            return Err(Error::InvalidParameter(format!(
                "offloading ratio must lie in [0, 1], got {}",
                self.cor
            )));
        }
        Ok(())
    }

    pub fn with_cor(self, cor: f64) -> Self {
        Self { cor, ..self }
    }

    pub fn with_tgr(self, tgr: f64) -> Self {
        Self { tgr, ..self }
    }
}

/// Compute and bandwidth resources seen by one UE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformProfile {
    pub ue_cpu_hz: f64,
    pub bs_cpu_hz: f64,
    pub ues_per_bs: u32,
    pub total_bandwidth_hz: f64,
}

impl Default for PlatformProfile {
    fn default() -> Self {
        Self {
            ue_cpu_hz: 1e9,
            bs_cpu_hz: 45e9,
            ues_per_bs: 20,
            total_bandwidth_hz: 50e6,
        }
    }
}

impl PlatformProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("UE CPU frequency", self.ue_cpu_hz),
            ("BS CPU frequency", self.bs_cpu_hz),
            ("total bandwidth", self.total_bandwidth_hz),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.ues_per_bs == 0 {
            return Err(Error::InvalidParameter("a BS must serve at least one UE".into()));
        }
        Ok(())
    }

    /// Edge compute allocated to each UE.
    pub fn edge_share_hz(&self) -> f64 {
        self.bs_cpu_hz / f64::from(self.ues_per_bs)
    }

    /// Uplink sub-channel bandwidth of each UE.
    pub fn bandwidth_share_hz(&self) -> f64 {
        self.total_bandwidth_hz / f64::from(self.ues_per_bs)
    }
}

/// Local service delay `G = C L / f`.
pub fn local_delay(task: &TaskProfile, plat: &PlatformProfile) -> f64 {
    task.cycles_per_bit * task.mean_size_bits / plat.ue_cpu_hz
}

/// Mean offloading delay `K = L / (B log2(1 + tau) Theta)` with the
/// round-robin bandwidth share `B = B_tot / N`.
pub fn offload_delay(task: &TaskProfile, plat: &PlatformProfile, tau_linear: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "transmission success probability must lie in (0, 1], got {theta}"
        )));
    }
    let spectral = (1.0 + tau_linear).log2();
    if !(spectral > 0.0) || !spectral.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "log2(1 + tau) must be positive, got tau = {tau_linear}"
        )));
    }
    Ok(task.mean_size_bits / (plat.bandwidth_share_hz() * spectral * theta))
}

/// Edge service delay `H = C L / g` with `g = f_B / N`.
pub fn edge_delay(task: &TaskProfile, plat: &PlatformProfile) -> f64 {
    task.cycles_per_bit * task.mean_size_bits / plat.edge_share_hz()
}

/// Rates of the three queues of a strictly partial configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialRates {
    pub mu_l: f64,
    pub mu_t: f64,
    pub mu_e: f64,
}

/// Delays and the service rates they induce at a given offloading ratio.
///
/// Rates that do not exist for a pure scheme are `None`: `mu_l` when
/// everything is offloaded, `mu_t`/`mu_e` when nothing is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceRates {
    pub g_delay: f64,
    pub k_delay: f64,
    pub h_delay: f64,
    pub mu_l: Option<f64>,
    pub mu_t: Option<f64>,
    pub mu_e: Option<f64>,
    pub theta_used: f64,
    pub beta: f64,
}

impl ServiceRates {
    /// Builds the rates directly from the three delays.
    pub fn from_delays(g_delay: f64, k_delay: f64, h_delay: f64, beta: f64, theta_used: f64) -> Result<Self> {
        for (name, v) in [("G", g_delay), ("K", k_delay), ("H", h_delay)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "delay {name} must be positive, got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "offloading ratio must lie in [0, 1], got {beta}"
            )));
        }
        let (mu_l, mu_t, mu_e) = if beta == 0.0 {
            (Some(1.0 / g_delay), None, None)
        } else if beta == 1.0 {
            (None, Some(1.0 / k_delay), Some(1.0 / h_delay))
        } else {
            (
                Some(1.0 / ((1.0 - beta) * g_delay)),
                Some(1.0 / (beta * k_delay)),
                Some(1.0 / (beta * h_delay)),
            )
        };
        Ok(Self {
            g_delay,
            k_delay,
            h_delay,
            mu_l,
            mu_t,
            mu_e,
            theta_used,
            beta,
        })
    }

    pub fn is_partial(&self) -> bool {
        self.beta > 0.0 && self.beta < 1.0
    }

    /// The three rates, or an error for a pure scheme.
    pub fn partial(&self) -> Result<PartialRates> {
        match (self.mu_l, self.mu_t, self.mu_e) {
            (Some(mu_l), Some(mu_t), Some(mu_e)) => Ok(PartialRates { mu_l, mu_t, mu_e }),
            _ => Err(Error::NotPartial(self.beta)),
        }
    }

    /// Local-only service rate `1/G`.
    pub fn pure_local(&self) -> f64 {
        1.0 / self.g_delay
    }

    /// Remote-only rates `(1/K, 1/H)`.
    pub fn pure_remote(&self) -> (f64, f64) {
        (1.0 / self.k_delay, 1.0 / self.h_delay)
    }
}

/// Service rates at the task's offloading ratio.
pub fn service_rates(task: &TaskProfile, plat: &PlatformProfile, tau_linear: f64, theta: f64) -> Result<ServiceRates> {
    task.validate()?;
    plat.validate()?;
    let g = local_delay(task, plat);
    let k = offload_delay(task, plat, tau_linear, theta)?;
    let h = edge_delay(task, plat);
    ServiceRates::from_delays(g, k, h, task.cor, theta)
}
