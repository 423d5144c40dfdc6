use serde::{Deserialize, Serialize};

use super::sawtooth::batch_ratio;
use super::TaskRecord;
use crate::error::{Error, Result};

/// Minimum number of post-warmup task pairs.
pub const MIN_CONDITIONAL_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Batch-means standard error.
    pub stderr: f64,
}

impl Estimate {
    /// `|value - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.stderr
    }
}

/// Sample counterparts of the closed-form intermediates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConditionals {
    pub pairs: usize,
    pub p_local_dominates: Estimate,
    pub p_remote_dominates: Estimate,
    /// E[Aˡ Tˡ | local finishes last].
    pub local_product: Estimate,
    /// E[Aᵗ Tᵗ’ᵉ | remote finishes last].
    pub remote_product: Estimate,
    pub mean_interarrival: Estimate,
    pub mean_sq_interarrival: Estimate,
    /// P(previous local system time exceeds the local inter-arrival).
    pub p_busy_on_arrival: Estimate,
    /// P(Tᵗ’ᵉ > Sˡ).
    pub p_y_positive: Estimate,
    /// E[Sˡ | local finishes last].
    pub mean_service_given_local: Estimate,
}

struct Pair {
    a_l: f64,
    t_l: f64,
    prev_t_l: f64,
    s_l: f64,
    a_t: f64,
    t_te: f64,
}

fn local_time(r: &TaskRecord) -> Option<f64> {
    r.local_done.map(|d| d - r.gen_time)
}

fn remote_time(r: &TaskRecord) -> Option<f64> {
    r.edge_done.map(|d| d - r.gen_time)
}

/// When every task visits both branches, task `n` supplies its own pair.
/// Otherwise the `k`-th local task is paired with the `k`-th remote task,
/// each with the inter-arrival time of its own branch.
fn build_pairs(records: &[TaskRecord]) -> Vec<Pair> {
    let replicated = records.iter().all(|r| r.local_done.is_some() && r.edge_done.is_some());
    if replicated {
        return records
            .windows(2)
            .filter_map(|w| {
                Some(Pair {
                    a_l: w[1].gen_time - w[0].gen_time,
                    t_l: local_time(&w[1])?,
                    prev_t_l: local_time(&w[0])?,
                    s_l: w[1].local_service?,
                    a_t: w[1].gen_time - w[0].gen_time,
                    t_te: remote_time(&w[1])?,
                })
            })
            .collect();
    }
    let local: Vec<&TaskRecord> = records.iter().filter(|r| r.local_done.is_some()).collect();
    let remote: Vec<&TaskRecord> = records.iter().filter(|r| r.edge_done.is_some()).collect();
    local
        .windows(2)
        .zip(remote.windows(2))
        .filter_map(|(l, e)| {
            Some(Pair {
                a_l: l[1].gen_time - l[0].gen_time,
                t_l: local_time(l[1])?,
                prev_t_l: local_time(l[0])?,
                s_l: l[1].local_service?,
                a_t: e[1].gen_time - e[0].gen_time,
                t_te: remote_time(e[1])?,
            })
        })
        .collect()
}

fn mean_of<F: Fn(&Pair) -> f64>(pairs: &[Pair], f: F) -> Estimate {
    let num: Vec<f64> = pairs.iter().map(&f).collect();
    let den = vec![1.0; pairs.len()];
    let (value, stderr) = batch_ratio(&num, &den);
    Estimate { value, stderr }
}

fn conditional<F: Fn(&Pair) -> f64, C: Fn(&Pair) -> bool>(pairs: &[Pair], f: F, cond: C) -> Estimate {
    let den: Vec<f64> = pairs.iter().map(|p| if cond(p) { 1.0 } else { 0.0 }).collect();
    let num: Vec<f64> = pairs.iter().zip(&den).map(|(p, d)| f(p) * d).collect();
    let (value, stderr) = batch_ratio(&num, &den);
    Estimate { value, stderr }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Estimates the intermediate quantities from the post-warmup part of a
/// trace.
pub fn empirical_conditionals(records: &[TaskRecord], warmup_fraction: f64) -> Result<EmpiricalConditionals> {
    let skip = (records.len() as f64 * warmup_fraction) as usize;
    let pairs = build_pairs(&records[skip.min(records.len())..]);
    if pairs.len() < MIN_CONDITIONAL_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_CONDITIONAL_SAMPLES,
            have: pairs.len(),
        });
    }
    let local_last = |p: &Pair| p.t_l > p.t_te;
    Ok(EmpiricalConditionals {
        pairs: pairs.len(),
        p_local_dominates: mean_of(&pairs, |p| indicator(local_last(p))),
        p_remote_dominates: mean_of(&pairs, |p| indicator(!local_last(p))),
        local_product: conditional(&pairs, |p| p.a_l * p.t_l, local_last),
        remote_product: conditional(&pairs, |p| p.a_t * p.t_te, |p| !local_last(p)),
        mean_interarrival: mean_of(&pairs, |p| p.a_l),
        mean_sq_interarrival: mean_of(&pairs, |p| p.a_l * p.a_l),
        p_busy_on_arrival: mean_of(&pairs, |p| indicator(p.prev_t_l > p.a_l)),
        p_y_positive: mean_of(&pairs, |p| indicator(p.t_te > p.s_l)),
        mean_service_given_local: conditional(&pairs, |p| p.s_l, local_last),
    })
}
