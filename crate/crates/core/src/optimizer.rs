//! Minimisation of the MAoI over the offloading ratio `beta` and the task
//! generation rate `xi`.
//!
//! A coarse grid (feasibility-masked, evaluated in parallel) locates the
//! basin; golden-section searches along one axis at a time then refine
//! the incumbent, accepting only improvements.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{maoi_for_ratio, STABILITY_MARGIN};
use crate::error::{Error, Result};
use crate::rates::{edge_delay, local_delay, offload_delay, PlatformProfile, ServiceRates, TaskProfile};

/// The three mean delays for the whole task plus the STP behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    /// Local computing delay `G`.
    pub g_delay: f64,
    /// Offloading delay `K`.
    pub k_delay: f64,
    /// Edge computing delay `H`.
    pub h_delay: f64,
    pub theta: f64,
}

impl Objective {
    pub fn from_profiles(task: &TaskProfile, plat: &PlatformProfile, tau_linear: f64, theta: f64) -> Result<Self> {
        task.validate()?;
        plat.validate()?;
        Ok(Objective {
            g_delay: local_delay(task, plat),
            k_delay: offload_delay(task, plat, tau_linear, theta)?,
            h_delay: edge_delay(task, plat),
            theta,
        })
    }

    pub fn rates(&self, beta: f64) -> Result<ServiceRates> {
        ServiceRates::from_delays(self.g_delay, self.k_delay, self.h_delay, beta, self.theta)
    }

    /// Largest `xi` satisfying every load cap at this `beta`.
    pub fn xi_max(&self, beta: f64, margin: f64) -> f64 {
        let mut cap = f64::INFINITY;
        if beta < 1.0 {
            cap = cap.min(1.0 / ((1.0 - beta).powi(2) * self.g_delay));
        }
        if beta > 0.0 {
            cap = cap.min(1.0 / (beta * beta * self.k_delay));
            cap = cap.min(1.0 / (beta * beta * self.h_delay));
        }
        (1.0 - margin) * cap
    }

    /// MAoI at `(beta, xi)`, or `+inf` where it is undefined.
    pub fn value(&self, beta: f64, xi: f64) -> f64 {
        self.rates(beta)
            .and_then(|r| maoi_for_ratio(&r, xi))
            .map(|r| r.maoi)
            .unwrap_or(f64::INFINITY)
    }
}

/// Load-cap test: `0 <= beta <= 1`, `xi > 0` and every queue's load at
/// most `1 - margin`.
pub fn feasible(obj: &Objective, beta: f64, xi: f64, margin: f64) -> bool {
    (0.0..=1.0).contains(&beta) && xi > 0.0 && xi <= obj.xi_max(beta, margin)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub beta_bounds: (f64, f64),
    pub xi_bounds: (f64, f64),
    pub stability_margin: f64,
    pub coarse_grid: usize,
    pub tolerance: f64,
    pub max_refinements: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            beta_bounds: (0.0, 1.0),
            xi_bounds: (1e-3, 5.0),
            stability_margin: STABILITY_MARGIN,
            coarse_grid: 64,
            tolerance: 1e-5,
            max_refinements: 50,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let (b0, b1) = self.beta_bounds;
        if !(0.0 <= b0 && b0 <= b1 && b1 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta bounds must satisfy 0 <= lo <= hi <= 1, got {:?}",
                self.beta_bounds
            )));
        }
        let (x0, x1) = self.xi_bounds;
        if !(0.0 < x0 && x0 <= x1 && x1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "xi bounds must be a positive interval, got {:?}",
                self.xi_bounds
            )));
        }
        if !(self.stability_margin > 0.0 && self.stability_margin < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "stability margin must lie in (0, 1), got {}",
                self.stability_margin
            )));
        }
        if self.coarse_grid < 8 {
            return Err(Error::InvalidParameter(format!(
                "coarse grid needs at least 8 points, got {}",
                self.coarse_grid
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub beta_star: f64,
    pub xi_star: f64,
    pub maoi_star: f64,
    pub evaluations: usize,
    /// Share of the coarse grid that was feasible.
    pub feasible_fraction: f64,
    /// The optimum sits on a bound or a load cap.
    pub boundary_flag: bool,
}

struct Search<'a> {
    obj: &'a Objective,
    cfg: &'a OptConfig,
    evaluations: usize,
}

impl Search<'_> {
    fn eval(&mut self, beta: f64, xi: f64) -> f64 {
        self.evaluations += 1;
        if !feasible(self.obj, beta, xi, self.cfg.stability_margin) {
            return f64::INFINITY;
        }
        self.obj.value(beta, xi)
    }

    /// Golden-section minimisation of `f` on `[a, b]` down to `tol`.
    fn golden<F: FnMut(&mut Self, f64) -> f64>(&mut self, mut a: f64, mut b: f64, tol: f64, mut f: F) -> (f64, f64) {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = f(self, c);
        let mut fd = f(self, d);
        while b - a > tol {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = f(self, c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = f(self, d);
            }
        }
        if fc <= fd {
            (c, fc)
        } else {
            (d, fd)
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi == lo {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn xi_upper(obj: &Objective, cfg: &OptConfig, beta: f64) -> f64 {
    cfg.xi_bounds.1.min(obj.xi_max(beta, cfg.stability_margin))
}

fn is_boundary(obj: &Objective, cfg: &OptConfig, beta: f64, xi: f64) -> bool {
    let db = 2.0 * cfg.tolerance;
    let dx = 2.0 * cfg.tolerance * xi.max(1.0);
    let (b0, b1) = cfg.beta_bounds;
    let (x0, x1) = cfg.xi_bounds;
    let near_box = (b1 > b0 && (beta - b0 < db || b1 - beta < db)) || (x1 > x0 && (xi - x0 < dx || x1 - xi < dx));
    let m = cfg.stability_margin;
    let near_cap = [(beta - db, xi), (beta + db, xi), (beta, xi + dx)]
        .iter()
        .any(|&(b, x)| (0.0..=1.0).contains(&b) && !feasible(obj, b, x, m));
    near_box || near_cap
}

fn grid_scan(obj: &Objective, cfg: &OptConfig, betas: &[f64], xis: &[f64]) -> Vec<(f64, f64, f64)> {
    let points: Vec<(f64, f64)> = betas.iter().flat_map(|&b| xis.iter().map(move |&x| (b, x))).collect();
    points
        .par_iter()
        .map(|&(b, x)| {
            let v = if feasible(obj, b, x, cfg.stability_margin) {
                obj.value(b, x)
            } else {
                f64::INFINITY
            };
            (b, x, v)
        })
        .collect()
}

fn best_of(points: &[(f64, f64, f64)]) -> Option<(f64, f64, f64)> {
    points
        .iter()
        .copied()
        .filter(|p| p.2.is_finite())
        .min_by(|a, b| a.2.total_cmp(&b.2))
}

fn finish(
    obj: &Objective,
    cfg: &OptConfig,
    best: (f64, f64, f64),
    evaluations: usize,
    feasible_fraction: f64,
) -> OptimumReport {
    OptimumReport {
        beta_star: best.0,
        xi_star: best.1,
        maoi_star: best.2,
        evaluations,
        feasible_fraction,
        boundary_flag: is_boundary(obj, cfg, best.0, best.1),
    }
}

fn feasible_share(points: &[(f64, f64, f64)]) -> f64 {
    points.iter().filter(|p| p.2.is_finite()).count() as f64 / points.len() as f64
}

fn infeasible(what: &str) -> Error {
    Error::Infeasible(format!("no feasible grid point for {what}"))
}

/// Best `beta` at a fixed generation rate.
pub fn optimize_beta_given_xi(obj: &Objective, xi: f64, cfg: &OptConfig) -> Result<OptimumReport> {
    cfg.validate()?;
    let betas = linspace(cfg.beta_bounds.0, cfg.beta_bounds.1, cfg.coarse_grid);
    let grid = grid_scan(obj, cfg, &betas, &[xi]);
    let mut best = best_of(&grid).ok_or_else(|| infeasible(&format!("xi = {xi}")))?;
    let mut search = Search {
        obj,
        cfg,
        evaluations: grid.len(),
    };
    let step = (cfg.beta_bounds.1 - cfg.beta_bounds.0) / (cfg.coarse_grid - 1) as f64;
    if step > 0.0 {
        let lo = (best.0 - step).max(cfg.beta_bounds.0);
        let hi = (best.0 + step).min(cfg.beta_bounds.1);
        let (b, v) = search.golden(lo, hi, cfg.tolerance, |s, b| s.eval(b, xi));
        if v < best.2 {
            best = (b, xi, v);
        }
    }
    Ok(finish(obj, cfg, best, search.evaluations, feasible_share(&grid)))
}

/// Best `xi` at a fixed offloading ratio.
pub fn optimize_xi_given_beta(obj: &Objective, beta: f64, cfg: &OptConfig) -> Result<OptimumReport> {
    cfg.validate()?;
    let hi = xi_upper(obj, cfg, beta);
    if !(hi >= cfg.xi_bounds.0) {
        return Err(infeasible(&format!("beta = {beta}")));
    }
    let xis = linspace(cfg.xi_bounds.0, hi, cfg.coarse_grid);
    let grid = grid_scan(obj, cfg, &[beta], &xis);
    let mut best = best_of(&grid).ok_or_else(|| infeasible(&format!("beta = {beta}")))?;
    let mut search = Search {
        obj,
        cfg,
        evaluations: grid.len(),
    };
    let step = (hi - cfg.xi_bounds.0) / (cfg.coarse_grid - 1) as f64;
    if step > 0.0 {
        let lo = (best.1 - step).max(cfg.xi_bounds.0);
        let up = (best.1 + step).min(hi);
        let (x, v) = search.golden(lo, up, cfg.tolerance, |s, x| s.eval(beta, x));
        if v < best.2 {
            best = (beta, x, v);
        }
    }
    Ok(finish(obj, cfg, best, search.evaluations, feasible_share(&grid)))
}

/// Joint minimisation over `(beta, xi)`.
pub fn optimize_joint(obj: &Objective, cfg: &OptConfig) -> Result<OptimumReport> {
    cfg.validate()?;
    let betas = linspace(cfg.beta_bounds.0, cfg.beta_bounds.1, cfg.coarse_grid);
    let xi_hi = betas
        .iter()
        .map(|&b| xi_upper(obj, cfg, b))
        .fold(cfg.xi_bounds.0, f64::max);
    let xis = linspace(cfg.xi_bounds.0, xi_hi, cfg.coarse_grid);
    let grid = grid_scan(obj, cfg, &betas, &xis);
    let mut best = best_of(&grid).ok_or_else(|| infeasible("the joint problem"))?;
    let mut search = Search {
        obj,
        cfg,
        evaluations: grid.len(),
    };

    let beta_step = (cfg.beta_bounds.1 - cfg.beta_bounds.0) / (cfg.coarse_grid - 1) as f64;
    let xi_step = (xi_hi - cfg.xi_bounds.0) / (cfg.coarse_grid - 1) as f64;
    for _ in 0..cfg.max_refinements {
        let before = best;
        if xi_step > 0.0 {
            let beta = best.0;
            let lo = (best.1 - xi_step).max(cfg.xi_bounds.0);
            let hi = (best.1 + xi_step).min(xi_upper(obj, cfg, beta));
            if hi > lo {
                let (x, v) = search.golden(lo, hi, cfg.tolerance, |s, x| s.eval(beta, x));
                if v < best.2 {
                    best = (beta, x, v);
                }
            }
        }
        if beta_step > 0.0 {
            let xi = best.1;
            let lo = (best.0 - beta_step).max(cfg.beta_bounds.0);
            let hi = (best.0 + beta_step).min(cfg.beta_bounds.1);
            let (b, v) = search.golden(lo, hi, cfg.tolerance, |s, b| s.eval(b, xi));
            if v < best.2 {
                best = (b, xi, v);
            }
        }
        if (best.0 - before.0).abs() < cfg.tolerance && (best.1 - before.1).abs() < cfg.tolerance {
            break;
        }
    }
    Ok(finish(obj, cfg, best, search.evaluations, feasible_share(&grid)))
}
