//! Uplink radio layer: successful-transmission probability (STP).
//!
//! Base stations form a Poisson point process and each serves UEs scattered
//! uniformly in a disc of the mean cell radius `1/sqrt(pi * lambda_b)`.
//! Uplink power follows fractional channel inversion with factor `epsilon`.
//! Two routes to the STP are provided: the closed form and a Monte Carlo
//! estimate of `P(SIR > tau)` at a typical base station.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_li};

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::substream;

/// Radio-layer parameters. `tau_linear` is a linear power ratio, never dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub tau_linear: f64,
    /// Pathloss exponent.
    pub alpha: f64,
    /// Power-control factor; 1 fully inverts the pathloss.
    pub epsilon: f64,
    /// Base-station density in BS per m².
    pub lambda_b: f64,
    /// Fixed transmit power in watts. It cancels in the SIR, so the sampler
    /// runs with unit power.
    pub p_tx: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            tau_linear: 1.0,
            alpha: 4.0,
            epsilon: 0.5,
            lambda_b: 1e-4,
            p_tx: 1.0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(Error::Domain(format!(
                "pathloss exponent must exceed 2, got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "power-control factor must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.tau_linear > 0.0) || !self.tau_linear.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "SIR threshold must be positive, got {}",
                self.tau_linear
            )));
        }
        if !(self.lambda_b > 0.0) || !self.lambda_b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "BS density must be positive, got {}",
                self.lambda_b
            )));
        }
        if !(self.p_tx > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transmit power must be positive, got {}",
                self.p_tx
            )));
        }
        Ok(())
    }

    /// Mean cell radius `1/sqrt(pi * lambda_b)`.
    pub fn cell_radius(&self) -> f64 {
        1.0 / (PI * self.lambda_b).sqrt()
    }
}

/// Which case of the closed form produced the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StpBranch {
    /// `0 <= epsilon < 1`
    PartialInversion,
    /// `epsilon == 1`
    FullInversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StpResult {
    pub sigma: f64,
    pub theta: f64,
    pub branch: StpBranch,
    /// `theta` lies in `[0, 1]`. An out-of-range value is still reported.
    pub valid: bool,
}

impl StpResult {
    fn new(sigma: f64, theta: f64, branch: StpBranch) -> Self {
        Self {
            sigma,
            theta,
            branch,
            valid: (0.0..=1.0).contains(&theta),
        }
    }
}

/// `sigma = 2 pi tau^(2/alpha) / (alpha (1 + epsilon) sin(2 pi / alpha))`.
pub fn sigma_coefficient(cfg: &RadioConfig) -> Result<f64> {
    cfg.validate()?;
    let a = cfg.alpha;
    let s = (2.0 * PI / a).sin();
    if !(s > 0.0) {
        return Err(Error::Domain(format!("sin(2pi/alpha) is not positive for alpha = {a}")));
    }
    Ok(2.0 * PI * cfg.tau_linear.powf(2.0 / a) / (a * (1.0 + cfg.epsilon) * s))
}

/// Generalised exponential integral `E_nu(x) = ∫_1^∞ e^{-x t} t^{-nu} dt`.
///
/// Nonpositive integer orders use the finite sum obtained by repeated
/// integration by parts,
/// `E_{-m}(x) = e^{-x} Σ_{k=0}^{m} m!/(m-k)! / x^{k+1}`.
/// Every other order goes through adaptive quadrature after the change of
/// variable `t = 1 + w/x`.
pub fn generalized_exp_integral(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("E_nu(x) needs x > 0, got {x}")));
    }
    if !nu.is_finite() {
        return Err(Error::Domain(format!("order must be finite, got {nu}")));
    }
    if nu <= 0.0 && nu == nu.round() && nu >= -170.0 {
        let m = (-nu) as u32;
        let mut term = 1.0 / x;
        let mut sum = term;
        for k in 1..=m {
            // m!/(m-k)! / x^{k+1} from the previous term
            term *= f64::from(m - k + 1) / x;
            sum += term;
        }
        return Ok((-x).exp() * sum);
    }
    let scaled = quad::integrate_to_infinity(|w| (-w).exp() * (1.0 + w / x).powf(-nu), 0.0, 0.0, 1e-13);
    Ok((-x).exp() / x * scaled.value)
}

/// Closed-form STP evaluated exactly as stated for each branch.
///
/// For `epsilon < 1` this is `E_{eps/(eps-1)}(sigma) + sigma^{1/(1-eps)}
/// Gamma(1 + 1/(1-eps))`. At the default operating point it exceeds one, so
/// the result carries `valid = false` instead of being clamped.
pub fn stp_closed_form(cfg: &RadioConfig) -> Result<StpResult> {
    let sigma = sigma_coefficient(cfg)?;
    let eps = cfg.epsilon;
    if eps == 1.0 {
        return Ok(StpResult::new(sigma, (-sigma).exp(), StpBranch::FullInversion));
    }
    let order = eps / (eps - 1.0);
    let shape = 1.0 + 1.0 / (1.0 - eps);
    let theta = generalized_exp_integral(order, sigma)? + sigma.powf(1.0 / (1.0 - eps)) * gamma(shape);
    Ok(StpResult::new(sigma, theta, StpBranch::PartialInversion))
}

/// Conjectured repair of the `epsilon < 1` branch with the lower incomplete
/// gamma `gamma(1 + 1/(1-eps), sigma)` in place of `Gamma(1 + 1/(1-eps))`.
///
/// Unverified; kept only so the comparison against Monte Carlo can be
/// reported next to the stated form.
pub fn stp_lower_gamma_variant(cfg: &RadioConfig) -> Result<StpResult> {
    let sigma = sigma_coefficient(cfg)?;
    let eps = cfg.epsilon;
    if eps == 1.0 {
        return Ok(StpResult::new(sigma, (-sigma).exp(), StpBranch::FullInversion));
    }
    let order = eps / (eps - 1.0);
    let shape = 1.0 + 1.0 / (1.0 - eps);
    let theta = generalized_exp_integral(order, sigma)? + sigma.powf(1.0 / (1.0 - eps)) * gamma_li(shape, sigma);
    Ok(StpResult::new(sigma, theta, StpBranch::PartialInversion))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McStpConfig {
    pub iterations: usize,
    /// Window radius in units of the mean cell radius.
    pub window_radius_factor: f64,
    pub seed: u64,
}

impl Default for McStpConfig {
    fn default() -> Self {
        Self {
            iterations: 100_000,
            window_radius_factor: 30.0,
            seed: 0x5EED_0001,
        }
    }
}

impl McStpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        if !(self.window_radius_factor >= 10.0) {
            return Err(Error::InvalidParameter(format!(
                "window radius factor must be at least 10, got {}",
                self.window_radius_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStpResult {
    pub theta_hat: f64,
    /// 95% normal-approximation half-width.
    pub ci_halfwidth: f64,
    /// Linear SIR of each realization, in iteration order.
    pub samples: Vec<f64>,
}

impl McStpResult {
    /// Re-thresholds the recorded samples; the realizations do not depend
    /// on `tau`, so this is the estimate a fresh run with the same seed
    /// would produce.
    pub fn at_threshold(&self, tau_linear: f64) -> (f64, f64) {
        let n = self.samples.len() as f64;
        let hits = self.samples.iter().filter(|&&s| s > tau_linear).count() as f64;
        let p = hits / n;
        (p, 1.96 * (p * (1.0 - p) / n).sqrt())
    }
}

/// One network realization seen from the typical base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirSample {
    /// Received power from the tagged UE, unit transmit power.
    pub signal: f64,
    pub interference: f64,
    pub interferers: usize,
    /// `signal / interference`; `+inf` when nobody interferes.
    pub sir: f64,
    pub tagged_distance: f64,
}

fn uniform_in_disc<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> (f64, f64) {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    (r * phi.cos(), r * phi.sin())
}

/// Draws one SIR realization.
///
/// Interfering base stations fill a disc of radius
/// `window_radius_factor * cell_radius`; each contributes exactly one
/// co-channel UE placed uniformly in its own cell disc.
pub fn sample_sir<R: Rng + ?Sized>(cfg: &RadioConfig, window_radius_factor: f64, rng: &mut R) -> SirSample {
    sample_sir_in_window(cfg, window_radius_factor * cfg.cell_radius(), rng)
}

/// Same as [`sample_sir`] with the interferer window given in metres.
pub fn sample_sir_in_window<R: Rng + ?Sized>(cfg: &RadioConfig, window: f64, rng: &mut R) -> SirSample {
    let rc = cfg.cell_radius();
    let a = cfg.alpha;
    let eps = cfg.epsilon;

    let (x0, y0) = uniform_in_disc(rng, rc);
    let r0 = x0.hypot(y0);
    let h0: f64 = Exp1.sample(rng);
    // h0 * R0^-alpha * (R0^-alpha)^-eps with unit power
    let signal = if eps == 1.0 { h0 } else { h0 * r0.powf(-a * (1.0 - eps)) };

    let mean = cfg.lambda_b * PI * window * window;
    let count = Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0);
    let mut interference = 0.0;
    for _ in 0..count {
        let (bx, by) = uniform_in_disc(rng, window);
        let (ux, uy) = uniform_in_disc(rng, rc);
        let ri = ux.hypot(uy);
        let di = (bx + ux).hypot(by + uy);
        let h: f64 = Exp1.sample(rng);
        interference += h * di.powf(-a) * ri.powf(a * eps);
    }
    let sir = if interference > 0.0 {
        signal / interference
    } else {
        f64::INFINITY
    };
    SirSample {
        signal,
        interference,
        interferers: count,
        sir,
        tagged_distance: r0,
    }
}

/// Iteration `index` of a Monte Carlo run, reproducible in isolation.
pub fn sample_sir_seeded(cfg: &RadioConfig, mc: &McStpConfig, index: u64) -> SirSample {
    let mut rng = substream(mc.seed, index);
    sample_sir(cfg, mc.window_radius_factor, &mut rng)
}

/// Empirical `P(SIR > tau)` over independent realizations, run in parallel.
pub fn stp_monte_carlo(cfg: &RadioConfig, mc: &McStpConfig) -> Result<McStpResult> {
    cfg.validate()?;
    mc.validate()?;
    let samples: Vec<f64> = (0..mc.iterations as u64)
        .into_par_iter()
        .map(|k| sample_sir_seeded(cfg, mc, k).sir)
        .collect();
    let n = samples.len() as f64;
    let hits = samples.iter().filter(|&&s| s > cfg.tau_linear).count() as f64;
    let theta_hat = hits / n;
    Ok(McStpResult {
        theta_hat,
        ci_halfwidth: 1.96 * (theta_hat * (1.0 - theta_hat) / n).sqrt(),
        samples,
    })
}
