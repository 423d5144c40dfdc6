//! Intermediate quantities behind the partial-scheme MAoI: probabilities,
//! conditional expectations and densities of the local/remote race.
//!
//! Notation: `A` is the local inter-arrival time, `T` the previous local
//! system time, `S` the local service time, `Y = T_remote - S` and
//! `X = T_remote - W` with `W` the local waiting time.

use serde::{Deserialize, Serialize};

use super::{coefficients, prob_local_dominates, Coefficients};
use crate::error::Result;
use crate::rates::PartialRates;

/// Named closed-form scalars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixOracles {
    /// P(local finishes last).
    pub p_local_dominates: f64,
    /// `1 - p_local_dominates`.
    pub p_remote_dominates: f64,
    /// The expanded product form stated for the remote-dominates
    /// probability. Differs from the complement; kept for comparison only.
    pub p_remote_dominates_expanded: f64,
    /// P(T > A) = rho_l.
    pub p_busy_on_arrival: f64,
    /// P(T < A) = 1 - rho_l.
    pub p_idle_on_arrival: f64,
    /// P(Y > 0).
    pub p_y_positive: f64,
    /// P(Y < 0).
    pub p_y_negative: f64,
    /// E[A T | T > A + Y, Y > 0].
    pub cond_product_y_positive: f64,
    /// E[A T | T > A] (also the `Y < 0` branch).
    pub cond_product_busy: f64,
    /// E[S | local dominates].
    pub mean_service_given_local: f64,
    /// P(A < T - Y, T > A).
    pub p_local_and_busy: f64,
    /// E[A | local dominates, T > A] = 1/mu_l.
    pub mean_arrival_given_local_busy: f64,
    /// E[A | local dominates, T < A].
    pub mean_arrival_given_idle: f64,
    /// Mass of the atom at zero in the local waiting time, `1 - rho_l`.
    pub waiting_atom: f64,
}

/// Evaluable densities for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Densities {
    pub rates: PartialRates,
    pub coefficients: Coefficients,
}

impl Densities {
    /// Local system time, exponential with rate `chi_l`.
    pub fn local_system_time(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        self.coefficients.chi_l * (-self.coefficients.chi_l * t).exp()
    }

    /// Remote system time, hypoexponential with rates `chi_t`, `chi_e`.
    pub fn remote_system_time(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let c = &self.coefficients;
        c.eta * ((-c.chi_t * t).exp() - (-c.chi_e * t).exp())
    }

    /// Density of `Y = T_remote - S`.
    pub fn y(&self, y: f64) -> f64 {
        let c = &self.coefficients;
        let r = &self.rates;
        if y > 0.0 {
            r.mu_l * c.eta * ((-c.chi_t * y).exp() / c.omega_lt - (-c.chi_e * y).exp() / c.omega_le)
        } else {
            r.mu_l * c.eta * (r.mu_e - r.mu_t) / (c.omega_lt * c.omega_le) * (r.mu_l * y).exp()
        }
    }

    /// Density of `X = T_remote - W` in its stated form. It does not
    /// integrate to one.
    pub fn x(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        let r = &self.rates;
        if x > 0.0 {
            c.eta
                * c.rho_l
                * (c.omega_lt / c.omega_t * (-c.chi_t * x).exp() - c.omega_le / c.omega_e * (-c.chi_e * x).exp())
        } else {
            c.eta * c.rho_l * c.chi_l * (r.mu_e - r.mu_t) / (c.omega_t * c.omega_e) * (c.chi_l * x).exp()
        }
    }

    /// Continuous part of the local waiting time, `chi_l rho_l e^{-chi_l w}`.
    /// The remaining `1 - rho_l` sits as an atom at zero.
    pub fn waiting_continuous(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let c = &self.coefficients;
        c.chi_l * c.rho_l * (-c.chi_l * w).exp()
    }
}

/// Densities for a strictly partial, stable, non-singular configuration.
pub fn densities(rates: &PartialRates, xi: f64, beta: f64) -> Result<Densities> {
    Ok(Densities {
        rates: *rates,
        coefficients: coefficients(rates, xi, beta)?,
    })
}

/// Evaluates every closed form at one operating point.
pub fn appendix_oracles(rates: &PartialRates, xi: f64, beta: f64) -> Result<AppendixOracles> {
    let c = coefficients(rates, xi, beta)?;
    let PartialRates { mu_l, mu_t, mu_e } = *rates;
    let bx = beta * xi;
    let lx = (1.0 - beta) * xi;

    let p_local = prob_local_dominates(&c);
    let p_expanded = c.chi_l * (mu_l + mu_t + mu_e - lx) / (c.omega_t * c.omega_e);
    let p_y_pos = mu_l * (mu_l + mu_t + mu_e - 2.0 * bx) / (c.omega_lt * c.omega_le);

    let cond_busy = (mu_l + 2.0 * c.chi_l) / (mu_l * mu_l * c.chi_l);
    let cond_y_pos = cond_busy
        + (c.omega_le * c.omega_e / c.omega_t - c.omega_lt * c.omega_t / c.omega_e)
            / (c.omega_le * c.omega_e - c.omega_lt * c.omega_t);

    let mean_service = 1.0 / mu_l + c.chi_l * (c.omega_lt + c.omega_e) / (mu_l * c.omega_lt * c.omega_le);
    let p_local_busy = c.eta * lx / (c.omega_lt * c.omega_le)
        * (c.omega_le / c.omega_t - c.omega_lt / c.omega_e + (mu_e - mu_t) / mu_l);

    Ok(AppendixOracles {
        p_local_dominates: p_local,
        p_remote_dominates: 1.0 - p_local,
        p_remote_dominates_expanded: p_expanded,
        p_busy_on_arrival: c.rho_l,
        p_idle_on_arrival: 1.0 - c.rho_l,
        p_y_positive: p_y_pos,
        p_y_negative: 1.0 - p_y_pos,
        cond_product_y_positive: cond_y_pos,
        cond_product_busy: cond_busy,
        mean_service_given_local: mean_service,
        p_local_and_busy: p_local_busy,
        mean_arrival_given_local_busy: 1.0 / mu_l,
        mean_arrival_given_idle: (mu_l + lx) / (mu_l * lx),
        waiting_atom: 1.0 - c.rho_l,
    })
}
