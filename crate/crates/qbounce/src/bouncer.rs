//! Gravitational eigenstates of a neutron above a perfect mirror.
//!
//! The vertical Schrödinger problem with potential m g z and a hard wall
//! at z = 0 rescales onto the Airy equation with the characteristic length
//! z0 = (hbar^2 / (2 m^2 g))^(1/3). The n-th stationary state is
//!
//!   psi_n(z) = Ai(z/z0 + a_n) / (sqrt(z0) |Ai'(a_n)|),   z >= 0,
//!
//! with a_n the n-th negative zero of Ai, level height z_n = -a_n z0 and
//! energy E_n = m g z_n (a few peV for the neutron).

use crate::airy::{airy_ai, airy_ai_prime, airy_zero};
use crate::{Error, Result};

/// Planck constant over 2 pi, J s (2018 CODATA exact value).
pub const HBAR: f64 = 1.054571817e-34;
/// Neutron mass, kg.
pub const NEUTRON_MASS: f64 = 1.67492750e-27;
/// Standard gravitational acceleration, m/s^2.
pub const STANDARD_GRAVITY: f64 = 9.80665;
/// One pico-electronvolt in joules.
pub const PEV: f64 = 1.602176634e-31;

/// The three constants the bouncer spectrum depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Particle mass, kg.
    pub m: f64,
    /// Gravitational acceleration, m/s^2.
    pub g: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants { hbar: HBAR, m: NEUTRON_MASS, g: STANDARD_GRAVITY }
    }
}

/// Characteristic scales of the linear-potential problem.
///
/// Lengths divide by `z0`, energies by `e0`, momenta by `p0`; in these
/// units the stationary equation is the dimensionless Airy equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravScale {
    /// (hbar^2 / (2 m^2 g))^(1/3), about 5.87 um for the neutron.
    pub z0: f64,
    /// m g z0.
    pub e0: f64,
    /// hbar / z0.
    pub p0: f64,
}

/// Derive the characteristic scales from the constants.
pub fn grav_scale(constants: &PhysicalConstants) -> GravScale {
    let z0 = (constants.hbar * constants.hbar / (2.0 * constants.m * constants.m * constants.g))
        .cbrt();
    GravScale { z0, e0: constants.m * constants.g * z0, p0: constants.hbar / z0 }
}

/// One gravitational level of the bouncer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenstate {
    /// Level index, 1-based.
    pub n: usize,
    /// n-th negative zero of Ai.
    pub a_n: f64,
    /// Level height -a_n z0, m.
    pub z_n: f64,
    /// Level energy m g z_n, J.
    pub e_n: f64,
    /// Normalization 1/(sqrt(z0) |Ai'(a_n)|), 1/sqrt(m).
    pub norm: f64,
}

impl Eigenstate {
    /// Characteristic length recovered from the stored fields.
    pub fn z0(&self) -> f64 {
        -self.z_n / self.a_n
    }
}

/// Build the n-th eigenstate (n >= 1).
pub fn eigenstate(
    n: usize,
    scale: &GravScale,
    constants: &PhysicalConstants,
) -> Result<Eigenstate> {
    let a_n = airy_zero(n)?;
    let z_n = -a_n * scale.z0;
    Ok(Eigenstate {
        n,
        a_n,
        z_n,
        e_n: constants.m * constants.g * z_n,
        norm: 1.0 / (scale.z0.sqrt() * airy_ai_prime(a_n).abs()),
    })
}

/// The first `n_max` eigenstates.
pub fn eigenstates(
    n_max: usize,
    scale: &GravScale,
    constants: &PhysicalConstants,
) -> Result<Vec<Eigenstate>> {
    (1..=n_max).map(|n| eigenstate(n, scale, constants)).collect()
}

/// psi_n(z), zero for z < 0 (hard mirror).
pub fn wavefunction(state: &Eigenstate, z: f64) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    state.norm * airy_ai(z / state.z0() + state.a_n)
}

/// Summed probability density on a height grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    /// Heights, m.
    pub z_grid: Vec<f64>,
    /// Sum of w_n |psi_n|^2, 1/m.
    pub values: Vec<f64>,
    /// Per-state weights that entered the sum.
    pub weights: Vec<f64>,
    /// |psi_n|^2 per state, same grid.
    pub per_state: Vec<Vec<f64>>,
}

/// P(z) = sum_n w_n |psi_n(z)|^2 over the first `n_max` levels.
pub fn density_profile(
    n_max: usize,
    z_grid: &[f64],
    weights: &[f64],
    scale: &GravScale,
    constants: &PhysicalConstants,
) -> Result<DensityProfile> {
    if z_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if weights.len() != n_max {
        return Err(Error::WeightsMismatch { expected: n_max, got: weights.len() });
    }
    let states = eigenstates(n_max, scale, constants)?;
    let per_state: Vec<Vec<f64>> = states
        .iter()
        .map(|s| z_grid.iter().map(|&z| wavefunction(s, z).powi(2)).collect())
        .collect();
    let values = (0..z_grid.len())
        .map(|i| per_state.iter().zip(weights).map(|(p, w)| w * p[i]).sum())
        .collect();
    Ok(DensityProfile { z_grid: z_grid.to_vec(), values, weights: weights.to_vec(), per_state })
}

/// Classical bouncer density 1/(2 sqrt(H (H - z))), the fraction of time a
/// ball with return point H spends near height z; normalized to 1 on [0, H).
pub fn classical_density(h_return: f64, z: f64) -> Result<f64> {
    if h_return <= 0.0 || z < 0.0 || z >= h_return {
        return Err(Error::HeightOutOfRange { z, h: h_return });
    }
    Ok(1.0 / (2.0 * (h_return * (h_return - z)).sqrt()))
}

/// Coarse Heisenberg criterion for ground-state destruction by the absorber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyBound {
    /// Momentum spread h / z_a forced by confinement to z_a, kg m/s.
    pub dp_z: f64,
    /// Classical vertical momentum at the mirror for the first level,
    /// m sqrt(2 g z_1).
    pub p1: f64,
    /// dp_z > p1: the confinement kicks exceed the ground-state momentum.
    pub blocked: bool,
}

/// Compare the confinement momentum spread h/z_a against the first-level
/// mirror momentum.
pub fn uncertainty_bound(z_a: f64, constants: &PhysicalConstants) -> Result<UncertaintyBound> {
    if z_a <= 0.0 {
        return Err(Error::InvalidParameter(format!("absorber height {z_a} must be positive")));
    }
    let scale = grav_scale(constants);
    let z_1 = -airy_zero(1)? * scale.z0;
    let dp_z = 2.0 * std::f64::consts::PI * constants.hbar / z_a;
    let p1 = constants.m * (2.0 * constants.g * z_1).sqrt();
    Ok(UncertaintyBound { dp_z, p1, blocked: dp_z > p1 })
}

/// Uniform grid from 0 to where psi_n has decayed, step z0/50. Suitable for
/// trapezoid quadrature of |psi_n|^2 at the crate's stated tolerances.
pub fn default_grid(n_max: usize, scale: &GravScale, constants: &PhysicalConstants) -> Vec<f64> {
    let z_top = eigenstate(n_max, scale, constants)
        .map(|s| s.z_n + 10.0 * scale.z0)
        .unwrap_or(10.0 * scale.z0);
    let step = scale.z0 / 50.0;
    let n = (z_top / step).ceil() as usize + 1;
    (0..n).map(|i| i as f64 * step).collect()
}

/// Trapezoid rule on an arbitrary strictly increasing grid.
pub fn trapezoid(z: &[f64], y: &[f64]) -> f64 {
    z.windows(2)
        .zip(y.windows(2))
        .map(|(zw, yw)| 0.5 * (yw[0] + yw[1]) * (zw[1] - zw[0]))
        .sum()
}
