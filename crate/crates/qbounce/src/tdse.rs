//! Time-dependent propagation through the absorbing slit.
//!
//! The vertical wave function evolves under
//!
//!   H = -hbar^2/(2m) d^2/dz^2 + m g z + i V_im(z),
//!
//! with a hard mirror (Dirichlet) at z = 0 and a uniform negative
//! imaginary potential -gamma above the absorber height z_a standing in
//! for the absorbing wall. Horizontal motion reduces to time through
//! t = x / v_x, valid because the beam divergence keeps v_z << v_x.
//! Stepping is Crank-Nicolson on a uniform grid: unconditionally stable,
//! norm-conserving to round-off without the absorber, strictly
//! dissipative with it.

use crate::bouncer::{eigenstates, wavefunction, GravScale, PhysicalConstants};
use crate::slitmodels::TransmissionCurve;
use crate::{Error, Result};
use num_complex::Complex64;

/// Absorber strength default, in units of the first level energy.
pub const DEFAULT_GAMMA_FACTOR: f64 = 10.0;
/// Horizontal speed used to convert slit length to transit time, m/s.
pub const DEFAULT_TRANSIT_SPEED: f64 = 7.0;
/// Time step default: (hbar / E_1) / 200.
pub const DEFAULT_DT_FRACTION: f64 = 1.0 / 200.0;

/// Uniform spatial grid [0, z_max] and time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Top of the box, m.
    pub z_max: f64,
    /// Grid points including both Dirichlet ends (>= 512).
    pub n_points: usize,
    /// Time step, s.
    pub dt: f64,
}

impl GridSpec {
    pub fn new(z_max: f64, n_points: usize, dt: f64) -> Result<Self> {
        if !(z_max > 0.0) || !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid needs positive z_max and dt, got {z_max}, {dt}"
            )));
        }
        if n_points < 512 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 512 points, got {n_points}"
            )));
        }
        Ok(GridSpec { z_max, n_points, dt })
    }

    /// Box four times the highest relevant level, 2048 points, default dt.
    pub fn for_levels(
        n_levels: usize,
        scale: &GravScale,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        let states = eigenstates(n_levels.max(1), scale, constants)?;
        let z_top = states.last().expect("non-empty").z_n;
        let e_1 = states[0].e_n;
        GridSpec::new(4.0 * z_top, 2048, constants.hbar / e_1 * DEFAULT_DT_FRACTION)
    }

    pub fn dz(&self) -> f64 {
        self.z_max / (self.n_points - 1) as f64
    }

    pub fn z_at(&self, i: usize) -> f64 {
        i as f64 * self.dz()
    }
}

/// Linear real potential plus the uniform imaginary absorber above z_a.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    /// m g z per point, J.
    pub v_real: Vec<f64>,
    /// 0 below z_a, -gamma at and above, J.
    pub v_imag: Vec<f64>,
    /// Absorber height, m.
    pub z_a: f64,
    /// Absorber strength, J (>= 0; enters as -i gamma).
    pub gamma: f64,
}

impl PotentialGrid {
    pub fn new(grid: &GridSpec, constants: &PhysicalConstants, z_a: f64, gamma: f64) -> Self {
        let v_real = (0..grid.n_points).map(|i| constants.m * constants.g * grid.z_at(i)).collect();
        let v_imag = (0..grid.n_points)
            .map(|i| if grid.z_at(i) >= z_a { -gamma } else { 0.0 })
            .collect();
        PotentialGrid { v_real, v_imag, z_a, gamma }
    }
}

/// Complex amplitudes on the grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavepacket {
    pub amplitudes: Vec<Complex64>,
    /// Elapsed propagation time, s.
    pub time: f64,
}

impl Wavepacket {
    /// Discrete norm squared, integral of |psi|^2 dz.
    pub fn norm_sq(&self, grid: &GridSpec) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dz()
    }

    /// Discrete inner product <self, other>.
    pub fn overlap(&self, other: &Wavepacket, grid: &GridSpec) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * grid.dz()
    }
}

/// How to prepare the packet at the slit entrance.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Stationary bouncer level n (1-based).
    Eigen(usize),
    /// Linear combination of the first levels with these amplitudes.
    Superposition(Vec<f64>),
    /// Gaussian of the given center and width, m.
    Gaussian { center: f64, width: f64 },
}

/// Build and normalize the initial packet on the grid.
pub fn init_state(
    spec: &InitialState,
    grid: &GridSpec,
    scale: &GravScale,
    constants: &PhysicalConstants,
) -> Result<Wavepacket> {
    let n = grid.n_points;
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    match spec {
        InitialState::Eigen(level) => {
            let states = eigenstates(*level, scale, constants)?;
            let st = states.last().ok_or(Error::ZeroNorm)?;
            for i in 1..n - 1 {
                amps[i] = Complex64::new(wavefunction(st, grid.z_at(i)), 0.0);
            }
        }
        InitialState::Superposition(weights) => {
            if weights.iter().all(|w| *w == 0.0) {
                return Err(Error::ZeroNorm);
            }
            let states = eigenstates(weights.len(), scale, constants)?;
            for i in 1..n - 1 {
                let z = grid.z_at(i);
                let v: f64 = states.iter().zip(weights).map(|(s, w)| w * wavefunction(s, z)).sum();
                amps[i] = Complex64::new(v, 0.0);
            }
        }
        InitialState::Gaussian { center, width } => {
            if *width < 4.0 * grid.dz() {
                return Err(Error::InvalidParameter(format!(
                    "gaussian width {width} below 4 dz = {}",
                    4.0 * grid.dz()
                )));
            }
            for i in 1..n - 1 {
                let d = (grid.z_at(i) - center) / width;
                amps[i] = Complex64::new((-0.5 * d * d).exp(), 0.0);
            }
        }
    }
    let mut packet = Wavepacket { amplitudes: amps, time: 0.0 };
    let norm = packet.norm_sq(grid).sqrt();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    for a in &mut packet.amplitudes {
        *a /= norm;
    }
    Ok(packet)
}

/// Crank-Nicolson stepper with precomputed tridiagonal factors.
///
/// (1 + i dt H / 2 hbar) psi_new = (1 - i dt H / 2 hbar) psi_old, solved
/// by the Thomas algorithm over the interior points; both walls Dirichlet.
pub struct Propagator {
    a_diag: Vec<Complex64>,
    b_diag: Vec<Complex64>,
    a_off: Complex64,
    b_off: Complex64,
    scratch_c: Vec<Complex64>,
    scratch_d: Vec<Complex64>,
    dt: f64,
}

impl Propagator {
    pub fn new(pot: &PotentialGrid, grid: &GridSpec, constants: &PhysicalConstants) -> Self {
        let n = grid.n_points;
        let dz = grid.dz();
        let kin = constants.hbar * constants.hbar / (2.0 * constants.m * dz * dz);
        let ia = Complex64::new(0.0, grid.dt / (2.0 * constants.hbar));
        let mut a_diag = Vec::with_capacity(n - 2);
        let mut b_diag = Vec::with_capacity(n - 2);
        for i in 1..n - 1 {
            let v = Complex64::new(pot.v_real[i], pot.v_imag[i]);
            let h = Complex64::new(2.0 * kin, 0.0) + v;
            a_diag.push(Complex64::new(1.0, 0.0) + ia * h);
            b_diag.push(Complex64::new(1.0, 0.0) - ia * h);
        }
        Propagator {
            a_diag,
            b_diag,
            a_off: -ia * kin,
            b_off: ia * kin,
            scratch_c: vec![Complex64::new(0.0, 0.0); n - 2],
            scratch_d: vec![Complex64::new(0.0, 0.0); n - 2],
            dt: grid.dt,
        }
    }

    /// Advance the packet by one dt in place.
    pub fn step(&mut self, psi: &mut Wavepacket) {
        let n = psi.amplitudes.len();
        let m = n - 2;
        let amps = &mut psi.amplitudes;
        let (c, d) = (&mut self.scratch_c, &mut self.scratch_d);

        // rhs into d, then Thomas forward sweep in place
        for i in 0..m {
            let left = amps[i]; // amps[(i+1)-1]
            let right = amps[i + 2];
            d[i] = self.b_diag[i] * amps[i + 1] + self.b_off * (left + right);
        }
        c[0] = self.a_off / self.a_diag[0];
        d[0] /= self.a_diag[0];
        for i in 1..m {
            let denom = self.a_diag[i] - self.a_off * c[i - 1];
            c[i] = self.a_off / denom;
            d[i] = (d[i] - self.a_off * d[i - 1]) / denom;
        }
        amps[m] = d[m - 1];
        for i in (0..m - 1).rev() {
            amps[i + 1] = d[i] - c[i] * amps[i + 2];
        }
        amps[0] = Complex64::new(0.0, 0.0);
        amps[n - 1] = Complex64::new(0.0, 0.0);
        psi.time += self.dt;
    }
}

/// One Crank-Nicolson step as a pure function.
pub fn step(
    psi: &Wavepacket,
    pot: &PotentialGrid,
    grid: &GridSpec,
    constants: &PhysicalConstants,
) -> Wavepacket {
    let mut out = psi.clone();
    Propagator::new(pot, grid, constants).step(&mut out);
    out
}

/// Result of a full transit.
#[derive(Debug, Clone)]
pub struct TransitResult {
    /// Final over initial norm squared.
    pub survival: f64,
    pub final_state: Wavepacket,
}

/// Propagate for t_transit = slit length / v_x and report the surviving
/// norm fraction.
pub fn propagate_transit(
    psi: &Wavepacket,
    pot: &PotentialGrid,
    grid: &GridSpec,
    constants: &PhysicalConstants,
    t_transit: f64,
) -> TransitResult {
    let steps = (t_transit / grid.dt).round().max(1.0) as usize;
    let mut prop = Propagator::new(pot, grid, constants);
    let mut state = psi.clone();
    let initial = psi.norm_sq(grid);
    for _ in 0..steps {
        prop.step(&mut state);
    }
    TransitResult { survival: state.norm_sq(grid) / initial, final_state: state }
}

/// Survival versus absorber height for a fixed initial superposition.
pub fn tdse_transmission_scan(
    z_a_grid: &[f64],
    init: &InitialState,
    grid: &GridSpec,
    scale: &GravScale,
    constants: &PhysicalConstants,
    gamma: f64,
    t_transit: f64,
) -> Result<TransmissionCurve> {
    if z_a_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let psi0 = init_state(init, grid, scale, constants)?;
    let counts = z_a_grid
        .iter()
        .map(|&z_a| {
            let pot = PotentialGrid::new(grid, constants, z_a, gamma);
            propagate_transit(&psi0, &pot, grid, constants, t_transit).survival
        })
        .collect();
    TransmissionCurve::new(z_a_grid.to_vec(), counts, "tdse", None)
}

/// Energy of a stationary input recovered from the rotation rate of the
/// overlap phase: <psi0|psi(t)> = exp(-i E t / hbar) for an eigenstate.
/// Propagates for t_total without absorber, sampling the unwrapped phase,
/// and returns the least-squares slope as an energy.
pub fn measure_phase_energy(
    init: &Wavepacket,
    grid: &GridSpec,
    constants: &PhysicalConstants,
    t_total: f64,
    samples: usize,
) -> f64 {
    let pot = PotentialGrid::new(grid, constants, grid.z_max * 2.0, 0.0);
    let mut prop = Propagator::new(&pot, grid, constants);
    let mut state = init.clone();
    let steps = (t_total / grid.dt).round().max(1.0) as usize;
    let every = (steps / samples).max(1);

    let mut times = Vec::with_capacity(samples + 1);
    let mut phases = Vec::with_capacity(samples + 1);
    let mut last_raw = 0.0;
    let mut offset = 0.0;
    for s in 1..=steps {
        prop.step(&mut state);
        if s % every == 0 {
            let raw = init.overlap(&state, grid).arg();
            let mut delta = raw - last_raw;
            while delta > std::f64::consts::PI {
                delta -= 2.0 * std::f64::consts::PI;
                offset -= 2.0 * std::f64::consts::PI;
            }
            while delta < -std::f64::consts::PI {
                delta += 2.0 * std::f64::consts::PI;
                offset += 2.0 * std::f64::consts::PI;
            }
            last_raw = raw;
            times.push(s as f64 * grid.dt);
            phases.push(raw + offset);
        }
    }
    // least-squares slope of phase(t); E = -hbar * slope
    let n = times.len() as f64;
    let mt = times.iter().sum::<f64>() / n;
    let mp = phases.iter().sum::<f64>() / n;
    let sxy: f64 = times.iter().zip(&phases).map(|(t, p)| (t - mt) * (p - mp)).sum();
    let sxx: f64 = times.iter().map(|t| (t - mt) * (t - mt)).sum();
    -constants.hbar * sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bouncer::{eigenstate, grav_scale};

    fn setup() -> (PhysicalConstants, GravScale, GridSpec) {
        let c = PhysicalConstants::default();
        let s = grav_scale(&c);
        let grid = GridSpec::for_levels(4, &s, &c).unwrap();
        (c, s, grid)
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1e-4, 256, 1e-6).is_err());
        assert!(GridSpec::new(-1.0, 1024, 1e-6).is_err());
        assert!(GridSpec::new(1e-4, 1024, 0.0).is_err());
        let (_, _, grid) = setup();
        assert!(grid.n_points >= 512);
        assert!((grid.dz() - grid.z_max / (grid.n_points - 1) as f64).abs() < 1e-30);
    }

    #[test]
    fn potential_shape() {
        let (c, _, grid) = setup();
        let z_a = 2e-5;
        let pot = PotentialGrid::new(&grid, &c, z_a, 1e-30);
        for i in 0..grid.n_points {
            assert!(pot.v_imag[i] <= 0.0);
            if grid.z_at(i) < z_a {
                assert_eq!(pot.v_imag[i], 0.0);
            } else {
                assert_eq!(pot.v_imag[i], -1e-30);
            }
            assert!((pot.v_real[i] - c.m * c.g * grid.z_at(i)).abs() < 1e-45);
        }
    }

    #[test]
    fn init_eigen_normalized() {
        let (c, s, grid) = setup();
        let psi = init_state(&InitialState::Eigen(1), &grid, &s, &c).unwrap();
        assert!((psi.norm_sq(&grid) - 1.0).abs() < 1e-10);
        assert_eq!(psi.amplitudes[0], Complex64::new(0.0, 0.0));
        assert_eq!(psi.amplitudes[grid.n_points - 1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn init_superposition_overlaps() {
        let (c, s, grid) = setup();
        let w = 1.0 / 2.0f64.sqrt();
        let psi = init_state(&InitialState::Superposition(vec![w, w]), &grid, &s, &c).unwrap();
        assert!((psi.norm_sq(&grid) - 1.0).abs() < 1e-10);
        for n in 1..=2 {
            let basis = init_state(&InitialState::Eigen(n), &grid, &s, &c).unwrap();
            let ov = basis.overlap(&psi, &grid).norm();
            assert!((ov - w).abs() < 1e-6, "overlap with level {n}: {ov}");
        }
    }

    #[test]
    fn init_gaussian_normalized_and_width_checked() {
        let (c, s, grid) = setup();
        let z1 = eigenstate(1, &s, &c).unwrap().z_n;
        let psi = init_state(
            &InitialState::Gaussian { center: 2.0 * z1, width: 0.5 * z1 },
            &grid,
            &s,
            &c,
        )
        .unwrap();
        assert!((psi.norm_sq(&grid) - 1.0).abs() < 1e-10);
        assert!(init_state(
            &InitialState::Gaussian { center: z1, width: 0.1 * grid.dz() },
            &grid,
            &s,
            &c
        )
        .is_err());
        assert!(matches!(
            init_state(&InitialState::Superposition(vec![0.0, 0.0]), &grid, &s, &c),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn single_step_conserves_norm_without_absorber() {
        let (c, s, grid) = setup();
        let psi = init_state(&InitialState::Eigen(1), &grid, &s, &c).unwrap();
        let pot = PotentialGrid::new(&grid, &c, grid.z_max * 2.0, 0.0);
        let next = step(&psi, &pot, &grid, &c);
        assert!((next.norm_sq(&grid) - psi.norm_sq(&grid)).abs() < 1e-12);
        assert!((next.time - grid.dt).abs() < 1e-20);
    }

    #[test]
    fn norm_decreases_with_absorber_on_state_above() {
        let (c, s, grid) = setup();
        let z1 = eigenstate(1, &s, &c).unwrap().z_n;
        // gaussian parked entirely above a low absorber edge
        let psi = init_state(
            &InitialState::Gaussian { center: 2.5 * z1, width: 0.4 * z1 },
            &grid,
            &s,
            &c,
        )
        .unwrap();
        let gamma = 10.0 * eigenstate(1, &s, &c).unwrap().e_n;
        let pot = PotentialGrid::new(&grid, &c, 0.5 * z1, gamma);
        let mut prop = Propagator::new(&pot, &grid, &c);
        let mut state = psi.clone();
        let mut prev = state.norm_sq(&grid);
        for _ in 0..20 {
            prop.step(&mut state);
            let n = state.norm_sq(&grid);
            assert!(n < prev, "norm must strictly decrease");
            prev = n;
        }
    }

    #[test]
    fn eigenstate_phase_matches_level_energy() {
        let (c, s, grid) = setup();
        let e1 = eigenstate(1, &s, &c).unwrap().e_n;
        let psi = init_state(&InitialState::Eigen(1), &grid, &s, &c).unwrap();
        // a tenth of a transit is plenty for the slope
        let t = 0.1 * 0.10 / DEFAULT_TRANSIT_SPEED;
        let e_meas = measure_phase_energy(&psi, &grid, &c, t, 40);
        assert!(
            ((e_meas - e1) / e1).abs() < 1e-3,
            "E1 measured {e_meas}, expected {e1}"
        );
    }

    #[test]
    fn transit_without_absorber_is_lossless() {
        let (c, s, grid) = setup();
        let psi = init_state(&InitialState::Eigen(1), &grid, &s, &c).unwrap();
        let pot = PotentialGrid::new(&grid, &c, grid.z_max * 2.0, 0.0);
        let t_transit = 0.02 * 0.10 / DEFAULT_TRANSIT_SPEED;
        let res = propagate_transit(&psi, &pot, &grid, &c, t_transit);
        assert!((res.survival - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ground_state_survives_high_absorber() {
        let (c, s, grid) = setup();
        let st1 = eigenstate(1, &s, &c).unwrap();
        let psi = init_state(&InitialState::Eigen(1), &grid, &s, &c).unwrap();
        let pot = PotentialGrid::new(&grid, &c, 3.0 * st1.z_n, 10.0 * st1.e_n);
        let t_transit = 0.10 / DEFAULT_TRANSIT_SPEED;
        let res = propagate_transit(&psi, &pot, &grid, &c, t_transit);
        assert!(res.survival > 0.9, "survival {}", res.survival);
    }

    #[test]
    fn scan_flat_at_gamma_zero() {
        let (c, s, grid) = setup();
        let z1 = eigenstate(1, &s, &c).unwrap().z_n;
        let grid_short = GridSpec { dt: grid.dt, ..grid };
        let t = 0.02 * 0.10 / DEFAULT_TRANSIT_SPEED;
        let curve = tdse_transmission_scan(
            &[0.5 * z1, z1, 2.0 * z1],
            &InitialState::Eigen(1),
            &grid_short,
            &s,
            &c,
            0.0,
            t,
        )
        .unwrap();
        for v in &curve.counts {
            assert!((v - 1.0).abs() < 1e-8);
        }
        assert!(tdse_transmission_scan(&[], &InitialState::Eigen(1), &grid, &s, &c, 0.0, t)
            .is_err());
    }
}
