//! Mean age of information (MAoI) for a UE in a partial-offloading MEC
//! network.
//!
//! - [`stp`]: successful transmission probability, closed form and Monte Carlo.
//! - [`rates`]: task/platform profiles to service rates.
//! - [`analytic`]: closed-form MAoI for local, remote and partial schemes.
//! - [`sim`]: discrete-event simulation with sawtooth AoI measurement.
//! - [`optimizer`]: joint minimisation over offloading ratio and generation rate.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod optimizer;
pub mod quad;
pub mod rates;
pub mod rng;
pub mod sim;
pub mod stp;

pub use error::{Error, Result};
