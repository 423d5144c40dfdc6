use serde::{Deserialize, Serialize};

use super::TaskRecord;
use crate::error::{Error, Result};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 32;

/// Time-average age measured from a completion trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SawtoothStats {
    /// `area / duration`, seconds.
    pub maoi_hat: f64,
    /// Area under the age curve, s².
    pub area: f64,
    /// First generation to last informative completion, s.
    pub duration: f64,
    /// Batch-means standard error of `maoi_hat`; NaN when there are
    /// fewer than `BATCHES` trapezoids.
    pub stderr: f64,
    /// Tasks that reset the age (fresher than anything delivered before).
    pub informative: usize,
}

/// Overall ratio `Σnum / Σden` and the standard error of the per-batch
/// ratios over `BATCHES` contiguous batches.
pub(crate) fn batch_ratio(num: &[f64], den: &[f64]) -> (f64, f64) {
    debug_assert_eq!(num.len(), den.len());
    let total = num.iter().sum::<f64>() / den.iter().sum::<f64>();
    let n = num.len();
    if n < BATCHES {
        return (total, f64::NAN);
    }
    let ratios: Vec<f64> = (0..BATCHES)
        .map(|b| {
            let (lo, hi) = (b * n / BATCHES, (b + 1) * n / BATCHES);
            num[lo..hi].iter().sum::<f64>() / den[lo..hi].iter().sum::<f64>()
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / BATCHES as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    (total, (var / BATCHES as f64).sqrt())
}

/// Integrates the age sawtooth over a trace sorted by generation time.
///
/// Records are visited in completion order; a completion resets the age
/// only if its task is fresher than everything delivered so far. Between
/// consecutive informative tasks `m` and `n` the curve contributes the
/// trapezoid `½Aₙ² + AₙTₙ` (gap in generation times `Aₙ`, system time
/// `Tₙ`); the last informative task adds the closing triangle `½T²`.
pub fn sawtooth_maoi(records: &[TaskRecord]) -> Result<SawtoothStats> {
    if records.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, have: 0 });
    }
    if let Some(i) = records.windows(2).position(|w| w[1].gen_time < w[0].gen_time) {
        return Err(Error::Unsorted(i + 1));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].complete_time.total_cmp(&records[b].complete_time));

    let mut pieces = Vec::new();
    let mut gaps = Vec::new();
    let mut freshest: Option<&TaskRecord> = None;
    for &i in &order {
        let r = &records[i];
        match freshest {
            None => freshest = Some(r),
            Some(prev) if r.gen_time > prev.gen_time => {
                let a = r.gen_time - prev.gen_time;
                let t = r.complete_time - r.gen_time;
                pieces.push(0.5 * a * a + a * t);
                gaps.push(a);
                freshest = Some(r);
            }
            Some(_) => {}
        }
    }
    let last = freshest.expect("records are nonempty");
    let first_gen = records[0].gen_time;
    let tail = last.complete_time - last.gen_time;
    let area = pieces.iter().sum::<f64>() + 0.5 * tail * tail;
    let duration = last.complete_time - first_gen;
    let (_, stderr) = batch_ratio(&pieces, &gaps);
    Ok(SawtoothStats {
        maoi_hat: area / duration,
        area,
        duration,
        stderr,
        informative: pieces.len() + 1,
    })
}
