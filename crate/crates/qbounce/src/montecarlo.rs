//! Classical stochastic transport through the absorbing slit.
//!
//! Particles enter at x = 0 below the absorber, fly exact parabolic arcs
//! (no time stepping), reflect specularly off the mirror at z = 0 and are
//! removed with probability kappa whenever an arc rises to the absorber
//! height z_a before leaving the slit. Every particle draws its randomness
//! from its own counter-indexed stream, so results are identical whether
//! histories run sequentially or partitioned across threads.

use crate::slitmodels::{BeamSpec, TransmissionCurve};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Classical trajectory state inside the slit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    /// Position along the slit, m.
    pub x: f64,
    /// Height above the mirror, m.
    pub z: f64,
    /// Horizontal speed, m/s (> 0).
    pub v_x: f64,
    /// Signed vertical speed, m/s.
    pub v_z: f64,
}

impl Particle {
    /// Apex of the current parabola, z + v_z^2/(2g) for a rising
    /// particle, the current height otherwise.
    pub fn return_point(&self, g: f64) -> f64 {
        if self.v_z > 0.0 {
            self.z + self.v_z * self.v_z / (2.0 * g)
        } else {
            self.z
        }
    }
}

/// Slit geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitGeometry {
    /// Length of the absorbing section, m.
    pub length_slit: f64,
    /// Absorber height, m.
    pub z_a: f64,
    /// Drop of the open mirror after the slit, m. Transport stops at the
    /// slit exit, so this only documents the downstream step; counts are
    /// invariant under it.
    pub mirror_offset: f64,
}

impl Default for SlitGeometry {
    fn default() -> Self {
        SlitGeometry { length_slit: 0.10, z_a: 1.0e-4, mirror_offset: 0.0 }
    }
}

/// Full Monte Carlo run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCConfig {
    pub n_particles: u64,
    pub seed: u64,
    pub geometry: SlitGeometry,
    pub beam: BeamSpec,
    /// Removal probability per absorber contact.
    pub kappa: f64,
    /// Probability of a diffuse (angle-resampling) mirror reflection.
    pub q_diffuse: f64,
    /// Gravitational acceleration, m/s^2.
    pub g: f64,
}

impl Default for MCConfig {
    fn default() -> Self {
        MCConfig {
            n_particles: 100_000,
            seed: 0,
            geometry: SlitGeometry::default(),
            beam: BeamSpec::default(),
            kappa: 1.0,
            q_diffuse: 0.0,
            g: crate::bouncer::STANDARD_GRAVITY,
        }
    }
}

/// Ensemble counts for one absorber height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCResult {
    pub n_transmitted: u64,
    pub n_absorbed: u64,
    pub n_total: u64,
    /// Mean mirror-bounce count among transmitted particles.
    pub mean_bounces: f64,
    /// Binomial standard error of the transmission ratio.
    pub err_transmission: f64,
}

impl MCResult {
    pub fn transmission(&self) -> f64 {
        self.n_transmitted as f64 / self.n_total as f64
    }
}

/// Outcome of a single history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Transmitted,
    /// Absorbed at the given 1-based bounce index (0: before any bounce).
    Absorbed(u32),
}

/// Draw one incident particle: entry height uniform on (0, z_a), speed
/// uniform on [v_min, v_max], angle uniform on [-theta_max, theta_max].
pub fn sample_incident<R: Rng>(beam: &BeamSpec, z_a: f64, rng: &mut R) -> Particle {
    let z = rng.gen_range(0.0..z_a);
    let v_x = rng.gen_range(beam.v_min..=beam.v_max);
    let theta = rng.gen_range(-beam.theta_max..=beam.theta_max);
    Particle { x: 0.0, z, v_x, v_z: v_x * theta.tan() }
}

/// Propagate one particle through the slit with exact parabolic arcs.
///
/// Per arc: if the apex reaches z_a inside the remaining length, the
/// particle contacts the absorber once at the upward crossing and is
/// removed with probability kappa; a survivor continues the same parabola.
/// At the mirror the reflection is specular with probability 1 - q_diffuse,
/// otherwise the outgoing angle resamples uniformly on [0, theta_max].
pub fn transport_slit<R: Rng>(
    mut p: Particle,
    geometry: &SlitGeometry,
    kappa: f64,
    q_diffuse: f64,
    theta_max: f64,
    g: f64,
    rng: &mut R,
) -> (Outcome, u32) {
    let mut bounces: u32 = 0;
    loop {
        let t_exit = (geometry.length_slit - p.x) / p.v_x;
        // absorber contact on this arc
        if p.v_z > 0.0 {
            let apex = p.z + p.v_z * p.v_z / (2.0 * g);
            if apex >= geometry.z_a {
                let disc = (p.v_z * p.v_z - 2.0 * g * (geometry.z_a - p.z)).max(0.0);
                let t_contact = (p.v_z - disc.sqrt()) / g;
                if t_contact < t_exit && (kappa >= 1.0 || rng.gen_range(0.0..1.0) < kappa) {
                    return (Outcome::Absorbed(bounces), bounces);
                }
            }
        }
        // mirror crossing
        let t_mirror = (p.v_z + (p.v_z * p.v_z + 2.0 * g * p.z).sqrt()) / g;
        if t_mirror >= t_exit {
            return (Outcome::Transmitted, bounces);
        }
        p.x += p.v_x * t_mirror;
        let v_impact = p.v_z - g * t_mirror; // < 0 at the mirror
        p.z = 0.0;
        bounces += 1;
        if q_diffuse > 0.0 && rng.gen_range(0.0..1.0) < q_diffuse {
            let theta = rng.gen_range(0.0..=theta_max);
            p.v_z = p.v_x * theta.tan();
        } else {
            p.v_z = -v_impact;
        }
    }
}

/// Run `n_particles` histories at the configured z_a.
///
/// Particle i draws from ChaCha stream (`stream_base` + i) of the seed, so
/// any partition over workers reproduces the sequential result exactly.
pub fn run_ensemble(config: &MCConfig, stream_base: u64) -> MCResult {
    let (transmitted, bounce_sum) = (0..config.n_particles)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream_base + i);
            let p = sample_incident(&config.beam, config.geometry.z_a, &mut rng);
            match transport_slit(
                p,
                &config.geometry,
                config.kappa,
                config.q_diffuse,
                config.beam.theta_max,
                config.g,
                &mut rng,
            ) {
                (Outcome::Transmitted, b) => (1u64, b as u64),
                (Outcome::Absorbed(_), _) => (0u64, 0u64),
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let n = config.n_particles;
    let ratio = transmitted as f64 / n as f64;
    MCResult {
        n_transmitted: transmitted,
        n_absorbed: n - transmitted,
        n_total: n,
        mean_bounces: if transmitted > 0 { bounce_sum as f64 / transmitted as f64 } else { 0.0 },
        err_transmission: (ratio * (1.0 - ratio) / n as f64).sqrt(),
    }
}

/// Transmission scan over a z_a grid. Counts are the transmission ratio
/// weighted by the aperture (entry area grows like z_a); errors are the
/// binomial ones under the same weight. Deterministic for a fixed seed.
pub fn run_transmission_scan(config: &MCConfig, z_a_grid: &[f64]) -> Result<TransmissionCurve> {
    if z_a_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut counts = Vec::with_capacity(z_a_grid.len());
    let mut errs = Vec::with_capacity(z_a_grid.len());
    for (idx, &z_a) in z_a_grid.iter().enumerate() {
        let mut point = *config;
        point.geometry.z_a = z_a;
        // decorrelate scan points without touching per-particle streams
        let res = run_ensemble(&point, (idx as u64) << 40);
        counts.push(res.transmission() * z_a);
        errs.push(res.err_transmission * z_a);
    }
    TransmissionCurve::new(z_a_grid.to_vec(), counts, "mc", Some(errs))
}

/// Mean bounce count among transmitted particles for the configuration.
pub fn average_bounce_count(config: &MCConfig) -> f64 {
    run_ensemble(config, 0).mean_bounces
}

/// Deterministic acceptance probability for kappa = 1, q_diffuse = 0 and a
/// single-speed beam: midpoint counting of the (z, theta) region whose
/// trajectory stays below z_a over the slit length. Closed-form test
/// per cell, no sampling; `cells` per axis.
pub fn acceptance_region_integral(
    geometry: &SlitGeometry,
    v_x: f64,
    theta_max: f64,
    g: f64,
    cells: usize,
) -> f64 {
    let mut accepted = 0u64;
    let t_exit = geometry.length_slit / v_x;
    for i in 0..cells {
        let z = (i as f64 + 0.5) / cells as f64 * geometry.z_a;
        for j in 0..cells {
            let theta = -theta_max + (j as f64 + 0.5) / cells as f64 * 2.0 * theta_max;
            let v_z = v_x * theta.tan();
            // all apexes equal the energy height; survival otherwise means
            // the first upward crossing of z_a falls beyond the exit
            let apex = z + v_z * v_z / (2.0 * g);
            let ok = if apex < geometry.z_a {
                true
            } else {
                let t_contact = if v_z > 0.0 {
                    (v_z - (v_z * v_z - 2.0 * g * (geometry.z_a - z)).max(0.0).sqrt()) / g
                } else {
                    let v_mirror = (v_z * v_z + 2.0 * g * z).sqrt();
                    let t_mirror = (v_z + v_mirror) / g;
                    t_mirror
                        + (v_mirror - (v_mirror * v_mirror - 2.0 * g * geometry.z_a).max(0.0).sqrt()) / g
                };
                t_contact >= t_exit
            };
            if ok {
                accepted += 1;
            }
        }
    }
    accepted as f64 / (cells * cells) as f64
}

/// Ordinary least-squares slope of ln(counts) against ln(z_a).
pub fn log_log_slope(curve: &TransmissionCurve) -> f64 {
    let pts: Vec<(f64, f64)> = curve
        .z_a_grid
        .iter()
        .zip(&curve.counts)
        .filter(|(_, &c)| c > 0.0)
        .map(|(&z, &c)| (z.ln(), c.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
