//! Quantum bouncer simulation library.
//!
//! A neutron bound below by a horizontal mirror and above by gravity forms
//! the "quantum bouncer": its stationary states are shifted Airy functions
//! with energies E_n = m g z_n. This crate implements the numerical kernel
//! (Airy function, eigenstates) together with every transmission model of
//! an absorbing-slit experiment that selects low bouncers:
//!
//! * [`airy`] — Ai, Ai' and the negative zeros, evaluated from scratch;
//! * [`bouncer`] — gravitational scales, eigenstates, probability densities;
//! * [`slitmodels`] — analytic transmission curves (classical power law,
//!   stepwise, per-level mode sum) and count-rate bookkeeping;
//! * [`fit`] — least-squares fitting of transmission data;
//! * [`montecarlo`] — classical trajectory transport through the slit;
//! * [`tdse`] — time-dependent Schrödinger propagation with a complex
//!   absorbing potential above the slit ceiling.

pub mod airy;
pub mod bouncer;
pub mod fit;
pub mod montecarlo;
pub mod slitmodels;
pub mod tdse;

/// Errors shared across the simulation modules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("level index {n} outside supported range 1..={max}")]
    LevelOutOfRange { n: usize, max: usize },
    #[error("root refinement for zero {n} did not converge in {budget} iterations")]
    ZeroNoConvergence { n: usize, budget: usize },
    #[error("probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },
    #[error("height {z} m not inside [0, {h}) m")]
    HeightOutOfRange { z: f64, h: f64 },
    #[error("grid is empty")]
    EmptyGrid,
    #[error("weights mismatch: expected {expected}, got {got}")]
    WeightsMismatch { expected: usize, got: usize },
    #[error("initial state has zero norm")]
    ZeroNorm,
    #[error("fit needs at least {needed} data points, got {got}")]
    NotEnoughData { needed: usize, got: usize },
    #[error("fit data is degenerate: {reason}")]
    DegenerateData { reason: String },
    #[error("fit did not converge after {iterations} iterations")]
    FitNoConvergence { iterations: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
