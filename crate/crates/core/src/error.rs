use thiserror::Error;

/// Errors raised by the analytic engine, the simulators and the optimizer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of a formula (e.g. alpha <= 2).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter record violates one of its invariants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A stability constraint of the queueing network is violated.
    #[error("unstable configuration: {constraint} (load {load:.6} exceeds cap {cap:.6})")]
    Instability {
        constraint: &'static str,
        load: f64,
        cap: f64,
    },

    /// A closed form hit a vanishing denominator.
    #[error("singular configuration: {0}")]
    Singularity(&'static str),

    /// The operation requires a strictly partial offloading ratio.
    #[error("offloading ratio {0} is not strictly inside (0, 1)")]
    NotPartial(f64),

    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("records are not sorted by generation time (index {0})")]
    Unsorted(usize),

    /// No feasible point exists in the search region.
    #[error("infeasible problem: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
