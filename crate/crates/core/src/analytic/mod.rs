//! Closed-form mean age of information (MAoI).
//!
//! The partial-offloading network is one M/M/1 local processor in parallel
//! with a transmitter → edge-server M/M/1 tandem. Arrivals are split by
//! Poisson thinning: `(1 - beta) xi` to the local queue, `beta xi` to the
//! tandem. The five `Ξ` terms are coded exactly as stated, including their
//! operator grouping, and assembled into the MAoI without renormalizing the
//! dominance weights.
//!
//! Two quirks of the stated expressions are kept as-is and surface in tests:
//! the partial MAoI does not converge to the local-only MAoI as
//! `beta → 0` (the `Ξ¹` bracket grows like `mu_t`), and at `beta → 1` it
//! lands a few percent away from the remote-only MAoI.

mod appendix;

pub use appendix::{appendix_oracles, densities, AppendixOracles, Densities};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{PartialRates, ServiceRates};

/// Loads are capped at `1 - STABILITY_MARGIN`.
pub const STABILITY_MARGIN: f64 = 1e-6;

/// `|mu_t - mu_e| < SINGULAR_GAP * max(mu_t, mu_e)` is treated as singular.
pub const SINGULAR_GAP: f64 = 1e-9;

/// Relative nudge applied to `mu_e` by [`maoi_partial_with_fallback`].
pub const SINGULAR_PERTURBATION: f64 = 1e-6;

/// Shorthand quantities shared by all closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    /// `mu_l + mu_t - xi`
    pub omega_t: f64,
    /// `mu_l + mu_e - xi`
    pub omega_e: f64,
    /// `mu_l - (1 - beta) xi`
    pub chi_l: f64,
    /// `mu_t - beta xi`
    pub chi_t: f64,
    /// `mu_e - beta xi`
    pub chi_e: f64,
    /// `mu_l + mu_t + mu_e - xi`
    pub gamma: f64,
    /// `mu_l + mu_t - beta xi`
    pub omega_lt: f64,
    /// `mu_l + mu_e - beta xi`
    pub omega_le: f64,
    /// `mu_t + mu_e - beta xi`
    pub omega_te: f64,
    /// `chi_t chi_e / (mu_e - mu_t)`
    pub eta: f64,
    /// `(1 - beta) xi / mu_l`
    pub rho_l: f64,
}

/// Checks `load <= 1 - STABILITY_MARGIN`.
pub(crate) fn check_load(constraint: &'static str, load: f64) -> Result<()> {
    let cap = 1.0 - STABILITY_MARGIN;
    if load <= cap && load.is_finite() {
        Ok(())
    } else {
        Err(Error::Instability { constraint, load, cap })
    }
}

fn check_partial_inputs(rates: &PartialRates, xi: f64, beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::NotPartial(beta));
    }
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "task generation rate must be positive, got {xi}"
        )));
    }
    for (name, v) in [("mu_l", rates.mu_l), ("mu_t", rates.mu_t), ("mu_e", rates.mu_e)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    check_load("C2 local processor", (1.0 - beta) * xi / rates.mu_l)?;
    check_load("C3 transmitter", beta * xi / rates.mu_t)?;
    check_load("C4 edge server", beta * xi / rates.mu_e)?;
    Ok(())
}

fn finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Singularity(what))
    }
}

/// Computes the shorthand quantities for a strictly partial, stable
/// configuration.
pub fn coefficients(rates: &PartialRates, xi: f64, beta: f64) -> Result<Coefficients> {
    check_partial_inputs(rates, xi, beta)?;
    let PartialRates { mu_l, mu_t, mu_e } = *rates;
    if (mu_t - mu_e).abs() < SINGULAR_GAP * mu_t.max(mu_e) {
        return Err(Error::Singularity("mu_t equals mu_e (eta denominator)"));
    }
    let bx = beta * xi;
    let chi_t = mu_t - bx;
    let chi_e = mu_e - bx;
    Ok(Coefficients {
        omega_t: mu_l + mu_t - xi,
        omega_e: mu_l + mu_e - xi,
        chi_l: mu_l - (1.0 - beta) * xi,
        chi_t,
        chi_e,
        gamma: mu_l + mu_t + mu_e - xi,
        omega_lt: mu_l + mu_t - bx,
        omega_le: mu_l + mu_e - bx,
        omega_te: mu_t + mu_e - bx,
        eta: chi_t * chi_e / (mu_e - mu_t),
        rho_l: (1.0 - beta) * xi / mu_l,
    })
}

/// Probability that the local branch finishes last,
/// `chi_t chi_e / (omega_t omega_e)`.
pub fn prob_local_dominates(c: &Coefficients) -> f64 {
    c.chi_t * c.chi_e / (c.omega_t * c.omega_e)
}

/// Complement of [`prob_local_dominates`].
pub fn prob_remote_dominates(c: &Coefficients) -> f64 {
    1.0 - prob_local_dominates(c)
}

/// `Ξ¹`, the conditional local product term.
pub fn xi1(c: &Coefficients, r: &PartialRates, xi: f64, beta: f64) -> Result<f64> {
    let PartialRates { mu_l, mu_t, mu_e } = *r;
    let bx = beta * xi;
    let inner_den = c.omega_le * c.omega_e - c.omega_lt * c.omega_t;
    if inner_den == 0.0 || inner_den.abs() < SINGULAR_GAP * (c.omega_le * c.omega_e).abs() {
        return Err(Error::Singularity(
            "Xi1 inner denominator omega_le*omega_e - omega_lt*omega_t",
        ));
    }
    let t1 = 1.0 / (mu_l * xi);
    let t2 = c.chi_l * (c.omega_lt + c.omega_e) / (mu_l * xi * c.omega_lt * c.omega_le);
    let bracket = (c.omega_lt + c.omega_le - mu_l) / inner_den
        * (c.omega_le * c.omega_e / c.omega_t - c.omega_lt * c.omega_t / c.omega_e)
        + (3.0 * mu_t - 2.0 * bx) / c.chi_l * ((mu_t - bx) * (mu_e - bx) / mu_l + c.omega_lt + c.omega_le - mu_l);
    let t3 = (1.0 - beta).powi(2) * xi / (mu_l * c.omega_lt * c.omega_le) * bracket;
    let t4 = 2.0 * (1.0 - beta).powi(2) / mu_l.powi(3);
    finite(t1 + t2 + t3 - t4, "Xi1")
}

/// `Ξ²`, the conditional transmitter product term.
pub fn xi2(c: &Coefficients, r: &PartialRates, xi: f64, beta: f64) -> Result<f64> {
    let PartialRates { mu_l, mu_t, mu_e } = *r;
    let bx = beta * xi;
    let t1 = 1.0 / (mu_t * xi);
    let t2 = (mu_t - bx) * (mu_e - bx) / (mu_t * xi * c.omega_lt * (c.omega_le + c.omega_t - mu_l));
    let t3 = beta * beta * xi / mu_t
        * ((3.0 * mu_t - 2.0 * bx) / (mu_t * (mu_t - bx)) + (mu_e - bx) / (c.omega_t * c.omega_e * c.omega_lt));
    let t4 = 2.0 * beta * beta * xi / mu_t.powi(3);
    finite(t1 + t2 + t3 - t4, "Xi2")
}

/// `Ξ³`, the conditional edge-service product term.
pub fn xi3(c: &Coefficients, r: &PartialRates, xi: f64, beta: f64) -> Result<f64> {
    let PartialRates { mu_t, mu_e, .. } = *r;
    let v = 1.0 / (mu_e * xi) + (mu_t - beta * xi) / (xi * c.omega_le * c.gamma);
    finite(v, "Xi3")
}

/// `Ξ⁴`, edge waiting while the transmitter was busy.
pub fn xi4(c: &Coefficients, r: &PartialRates, xi: f64, beta: f64) -> Result<f64> {
    let PartialRates { mu_t, mu_e, .. } = *r;
    let bx = beta * xi;
    let t1 =
        mu_e * (mu_t - bx) / (mu_t * c.omega_t * c.omega_le) * (1.0 / (mu_e - bx) + 1.0 / c.omega_e + 1.0 / c.gamma);
    let t2 = 1.0 / (mu_t * c.omega_te);
    let t3 =
        c.chi_l * c.gamma * (mu_t + 2.0 * mu_e - 2.0 * bx) / (mu_t * c.omega_t * (mu_e - bx) * c.omega_te * c.omega_le);
    finite(t1 - t2 + t3, "Xi4")
}

/// `Ξ⁵`, edge waiting while the transmitter was idle.
pub fn xi5(c: &Coefficients, r: &PartialRates, xi: f64, beta: f64) -> Result<f64> {
    let PartialRates { mu_t, mu_e, .. } = *r;
    let bx = beta * xi;
    let chi_l = c.chi_l;
    let g = c.gamma;
    let pair = (chi_l + mu_t) * (chi_l + mu_e);
    let inner = 1.0 / (mu_e - bx) - 1.0 / c.omega_te
        + mu_t * mu_e / pair * (1.0 / c.omega_t + 1.0 / g)
        + chi_l * (chi_l + mu_t + mu_e) / pair * (mu_e / (g * (g + mu_e)) + 1.0 / c.omega_te)
        - mu_e * (mu_e - bx) / (g * ((c.omega_e + mu_e) * g + mu_e * (mu_e - bx)));
    finite((mu_t + mu_e) / (mu_t * mu_e) * inner, "Xi5")
}

/// Which offloading scheme a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Local,
    Remote,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaoiReport {
    pub scheme: Scheme,
    /// Mean age of information in seconds.
    pub maoi: f64,
    /// `Ξ¹..Ξ⁵`, partial scheme only.
    pub xi_terms: Option<[f64; 5]>,
    pub p_local_dominates: f64,
    pub p_remote_dominates: f64,
    pub coefficients: Option<Coefficients>,
}

/// Partial-offloading MAoI with every intermediate exposed.
pub fn maoi_partial(rates: &PartialRates, xi: f64, beta: f64) -> Result<MaoiReport> {
    let c = coefficients(rates, xi, beta)?;
    let terms = [
        xi1(&c, rates, xi, beta)?,
        xi2(&c, rates, xi, beta)?,
        xi3(&c, rates, xi, beta)?,
        xi4(&c, rates, xi, beta)?,
        xi5(&c, rates, xi, beta)?,
    ];
    let PartialRates { mu_t, mu_e, .. } = *rates;
    let bx = beta * xi;
    let local_part = (mu_t - bx) * (mu_e - bx) * terms[0];
    let remote_part = c.chi_l
        * (c.gamma + bx)
        * (terms[1]
            + terms[2]
            + beta * beta * xi / c.omega_te * terms[3]
            + beta * beta * xi * c.chi_t / (mu_e * c.omega_te) * terms[4]);
    let maoi = finite(
        xi / (c.omega_t * c.omega_e) * (local_part + remote_part) + 1.0 / xi,
        "MAoI",
    )?;
    let p_local = prob_local_dominates(&c);
    Ok(MaoiReport {
        scheme: Scheme::Partial,
        maoi,
        xi_terms: Some(terms),
        p_local_dominates: p_local,
        p_remote_dominates: 1.0 - p_local,
        coefficients: Some(c),
    })
}

/// [`maoi_partial`], retrying once with `mu_e` nudged by one part in 10⁶
/// when the configuration sits on the `mu_t = mu_e` singularity.
pub fn maoi_partial_with_fallback(rates: &PartialRates, xi: f64, beta: f64) -> Result<MaoiReport> {
    match maoi_partial(rates, xi, beta) {
        Err(Error::Singularity(_)) => {
            let nudged = PartialRates {
                mu_e: rates.mu_e * (1.0 + SINGULAR_PERTURBATION),
                ..*rates
            };
            maoi_partial(&nudged, xi, beta)
        }
        other => other,
    }
}

fn check_pure_inputs(xi: f64, rates: &[(&'static str, f64)]) -> Result<()> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "task generation rate must be positive, got {xi}"
        )));
    }
    for &(name, mu) in rates {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {mu}")));
        }
        check_load(name, xi / mu)?;
    }
    Ok(())
}

/// Local-only MAoI, `xi²/(mu² (mu - xi)) + 1/mu + 1/xi`.
pub fn maoi_local(mu: f64, xi: f64) -> Result<MaoiReport> {
    check_pure_inputs(xi, &[("local processor", mu)])?;
    let maoi = xi * xi / (mu * mu * (mu - xi)) + 1.0 / mu + 1.0 / xi;
    Ok(MaoiReport {
        scheme: Scheme::Local,
        maoi,
        xi_terms: None,
        p_local_dominates: 1.0,
        p_remote_dominates: 0.0,
        coefficients: None,
    })
}

/// Remote-only MAoI of the transmitter → edge tandem.
pub fn maoi_remote(mu_t: f64, mu_e: f64, xi: f64) -> Result<MaoiReport> {
    check_pure_inputs(xi, &[("transmitter", mu_t), ("edge server", mu_e)])?;
    let s = mu_t + mu_e;
    let first = xi * xi * (s * (s - xi) - mu_t * mu_e) / (mu_t * mu_e * mu_e * (mu_e - xi) * (s - xi));
    let maoi = first + xi * xi / (mu_t * mu_t * (mu_t - xi)) + 1.0 / mu_t + 1.0 / xi + 1.0 / mu_e;
    Ok(MaoiReport {
        scheme: Scheme::Remote,
        maoi,
        xi_terms: None,
        p_local_dominates: 0.0,
        p_remote_dominates: 1.0,
        coefficients: None,
    })
}

/// MAoI for any offloading ratio: the pure-scheme forms at the endpoints,
/// the partial form (with the singularity fallback) strictly inside.
pub fn maoi_for_ratio(rates: &ServiceRates, xi: f64) -> Result<MaoiReport> {
    if rates.beta == 0.0 {
        maoi_local(rates.pure_local(), xi)
    } else if rates.beta == 1.0 {
        let (mu_t, mu_e) = rates.pure_remote();
        maoi_remote(mu_t, mu_e, xi)
    } else {
        maoi_partial_with_fallback(&rates.partial()?, xi, rates.beta)
    }
}
