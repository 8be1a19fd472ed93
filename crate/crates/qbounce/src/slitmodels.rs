//! Analytic transmission models for the absorbing slit.
//!
//! The measured observable is a count rate versus absorber height z_a:
//!
//!   T(z_a) = phi A (1 - r) eps p_sur(z_a),      phi = rho v,  A ~ z_a,
//!
//! with survival over n_b wall contacts p_sur = (1 - p_a)^(n_b). The
//! models here span the idealized stepwise expectation (jumps at every
//! level height z_n), the classical z_a^(3/2) power law, a subtracted
//! semi-classical variant, and a per-level mode sum in which each state
//! decays according to its probability weight above the absorber.

use crate::bouncer::{wavefunction, Eigenstate};
use crate::{Error, Result};

/// Incident beam parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    /// Neutron number density, 1/m^3. Overall scale only; the absolute
    /// normalization of the experiment is not published.
    pub rho: f64,
    /// Slowest horizontal speed, m/s.
    pub v_min: f64,
    /// Fastest horizontal speed, m/s.
    pub v_max: f64,
    /// Half-opening of the vertical divergence, rad.
    pub theta_max: f64,
    /// Transverse slit width (the non-selecting direction), m.
    pub width: f64,
}

impl BeamSpec {
    /// Mean horizontal speed.
    pub fn v_mean(&self) -> f64 {
        0.5 * (self.v_min + self.v_max)
    }
}

impl Default for BeamSpec {
    fn default() -> Self {
        BeamSpec { rho: 1.0, v_min: 4.0, v_max: 10.0, theta_max: 1e-4, width: 0.10 }
    }
}

/// Absorber and detection bookkeeping for the count rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorberModel {
    /// Removal probability per wall contact, 0..=1.
    pub kappa: f64,
    /// Expected number of wall contacts during a transit.
    pub n_b: f64,
    /// Reflection probability off the front aperture.
    pub r_front: f64,
    /// Detector efficiency.
    pub eff_det: f64,
}

impl Default for AbsorberModel {
    fn default() -> Self {
        AbsorberModel { kappa: 1.0, n_b: 15.0, r_front: 0.0, eff_det: 1.0 }
    }
}

/// One transmission curve: counts (or a normalized stand-in) on a strictly
/// increasing z_a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionCurve {
    /// Absorber heights, m.
    pub z_a_grid: Vec<f64>,
    /// Counts per second, or model value.
    pub counts: Vec<f64>,
    /// Which model produced the curve.
    pub model_tag: String,
    /// Statistical errors where the model is stochastic.
    pub stat_err: Option<Vec<f64>>,
}

impl TransmissionCurve {
    pub fn new(
        z_a_grid: Vec<f64>,
        counts: Vec<f64>,
        model_tag: impl Into<String>,
        stat_err: Option<Vec<f64>>,
    ) -> Result<Self> {
        if z_a_grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if z_a_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("z_a grid must be strictly increasing".into()));
        }
        if counts.len() != z_a_grid.len() {
            return Err(Error::WeightsMismatch { expected: z_a_grid.len(), got: counts.len() });
        }
        if counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
            return Err(Error::InvalidParameter("counts must be finite and nonnegative".into()));
        }
        Ok(TransmissionCurve { z_a_grid, counts, model_tag: model_tag.into(), stat_err })
    }
}

/// Survival over `n_b` contacts with per-contact loss `p_a`:
/// (1 - p_a)^(n_b).
pub fn survival_probability(p_a: f64, n_b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_a) {
        return Err(Error::ProbabilityOutOfRange { value: p_a });
    }
    if n_b < 0.0 || !n_b.is_finite() {
        return Err(Error::InvalidParameter(format!("bounce count {n_b} must be >= 0")));
    }
    Ok((1.0 - p_a).powf(n_b))
}

/// Count rate rho v A (1-r) eps p_sur with A = width z_a, so that at fixed
/// beam the rate scales like z_a p_sur(z_a).
pub fn count_rate(beam: &BeamSpec, z_a: f64, absorber: &AbsorberModel, p_sur: f64) -> f64 {
    beam.rho
        * beam.v_mean()
        * beam.width
        * z_a
        * (1.0 - absorber.r_front)
        * absorber.eff_det
        * p_sur
}

/// Classical phase-space curve scale_c z_a^(3/2).
pub fn classical_transmission(z_a: f64, scale_c: f64) -> f64 {
    scale_c * z_a.powf(1.5)
}

/// The idealized stepwise expectation: zero below z_1, a jump of w_n at
/// each level height z_n, constant in between.
pub fn stepwise_transmission(z_a: f64, states: &[Eigenstate], weights: &[f64]) -> f64 {
    states
        .iter()
        .zip(weights)
        .filter(|(s, _)| z_a >= s.z_n)
        .map(|(_, w)| w)
        .sum()
}

/// Probability weight of state n above the absorber,
/// tau_n(z_a) = integral of psi_n^2 from z_a to infinity.
///
/// Composite Simpson quadrature with step z0/128 up to where the state has
/// decayed; absolute accuracy well below 1e-6.
pub fn mode_tail(state: &Eigenstate, z_a: f64) -> f64 {
    if z_a <= 0.0 {
        return 1.0;
    }
    let z0 = state.z0();
    let z_end = state.z_n + 12.0 * z0;
    if z_a >= z_end {
        return 0.0;
    }
    let step = z0 / 128.0;
    let mut n = ((z_end - z_a) / step).ceil() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    let h = (z_end - z_a) / n as f64;
    let mut sum = wavefunction(state, z_a).powi(2) + wavefunction(state, z_end).powi(2);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * wavefunction(state, z_a + i as f64 * h).powi(2);
    }
    (sum * h / 3.0).min(1.0)
}

/// Mode-sum transmission: each level survives n_b contacts with
/// per-contact loss kappa tau_n(z_a),
/// sum_n w_n max(0, 1 - kappa tau_n)^(n_b).
pub fn modesum_transmission(
    z_a: f64,
    states: &[Eigenstate],
    weights: &[f64],
    absorber: &AbsorberModel,
) -> f64 {
    states
        .iter()
        .zip(weights)
        .map(|(s, w)| {
            let base = (1.0 - absorber.kappa * mode_tail(s, z_a)).max(0.0);
            w * base.powf(absorber.n_b)
        })
        .sum()
}

/// Classical curve with the lowest-level phase space removed:
/// scale_c max(0, z_a^(3/2) - z_cut^(3/2)).
pub fn semiclassical_lowest_level(z_a: f64, scale_c: f64, z_cut: f64) -> f64 {
    scale_c * (z_a.powf(1.5) - z_cut.powf(1.5)).max(0.0)
}
