use thiserror::Error;

/// Errors raised by construction, evaluation and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The sampling step is too coarse for the signal's band: σ ≥ π/h.
    #[error("band too wide: sigma = {sigma} but pi/h = {limit}")]
    BandTooWide { sigma: f64, limit: f64 },

    #[error("quadrature order {order} exceeds the cap {cap}")]
    OrderTooHigh { order: usize, cap: usize },

    #[error("point {x} is not on the grid of step {step}")]
    OffGrid { x: f64, step: f64 },

    #[error("oracle failed to reach tolerance {tol:e} (estimate {estimate:e}) after {refinements} refinements")]
    OracleFailure { tol: f64, estimate: f64, refinements: usize },

    #[error("input {value} outside the admissible domain [{lo}, {hi}]")]
    DomainError { value: f64, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
