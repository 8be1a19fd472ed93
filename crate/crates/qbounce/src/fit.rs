//! Least-squares fitting of transmission curves.
//!
//! A small Levenberg-Marquardt driver with a numeric Jacobian, sized for
//! the one-to-few parameter fits the transmission models need. Converges
//! on relative step < 1e-8 or gives up after 200 iterations.

use crate::bouncer::Eigenstate;
use crate::slitmodels::{mode_tail, TransmissionCurve};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-8;

/// Which curve shape to fit.
#[derive(Debug, Clone)]
pub enum FitModel<'a> {
    /// counts = c z_a^(3/2); free parameter `c`.
    Classical,
    /// counts = c max(0, z_a^(3/2) - z_cut^(3/2)); free `c`, and `z_cut`
    /// when `fit_z_cut` is set.
    SemiclassicalLowest { z_cut: f64, fit_z_cut: bool },
    /// counts = scale sum_n w_n (1 - kappa tau_n(z_a))^(n_b).
    /// Free `scale` and, as requested, `kappa` and/or the level weights
    /// (weights replace the overall scale to keep the problem determined).
    ModeSum { states: &'a [Eigenstate], n_b: f64, fit_kappa: bool, fit_weights: bool },
}

/// Fit result. `converged` is false when the iteration budget ran out;
/// the best parameters found so far are still reported.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    /// Sum of squared (weighted) residuals at the reported parameters.
    pub residual_ss: f64,
    /// Finite-difference covariance estimate, s^2 (J^T J)^(-1).
    pub covariance: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub weighted: bool,
}

/// Least-squares fit of one of the transmission models to measured counts.
/// When the curve carries `stat_err`, residuals are weighted by 1/sigma.
pub fn fit_transmission(data: &TransmissionCurve, model: &FitModel) -> Result<FitOutcome> {
    let x = &data.z_a_grid;
    let y = &data.counts;
    if x.windows(2).all(|w| w[0] == w[1]) && x.len() > 1 {
        return Err(Error::DegenerateData { reason: "all z_a equal".into() });
    }
    let sigma: Option<Vec<f64>> = data.stat_err.as_ref().map(|e| {
        e.iter().map(|&s| if s > 0.0 { s } else { 1.0 }).collect()
    });

    match model {
        FitModel::Classical => {
            let p0 = vec![initial_power_scale(x, y, 1.5)];
            run_fit(x, y, sigma.as_deref(), vec!["c".into()], p0, |p, za| {
                p[0] * za.powf(1.5)
            })
        }
        FitModel::SemiclassicalLowest { z_cut, fit_z_cut } => {
            let cut = *z_cut;
            if *fit_z_cut {
                let p0 = vec![initial_power_scale(x, y, 1.5), cut];
                run_fit(x, y, sigma.as_deref(), vec!["c".into(), "z_cut".into()], p0, |p, za| {
                    p[0] * (za.powf(1.5) - p[1].abs().powf(1.5)).max(0.0)
                })
            } else {
                let p0 = vec![initial_power_scale(x, y, 1.5)];
                run_fit(x, y, sigma.as_deref(), vec!["c".into()], p0, move |p, za| {
                    p[0] * (za.powf(1.5) - cut.powf(1.5)).max(0.0)
                })
            }
        }
        FitModel::ModeSum { states, n_b, fit_kappa, fit_weights } => {
            if states.is_empty() {
                return Err(Error::InvalidParameter("mode sum needs at least one level".into()));
            }
            // tails depend only on z_a: precompute the n_levels x n_points table
            let tails: Vec<Vec<f64>> =
                states.iter().map(|s| x.iter().map(|&za| mode_tail(s, za)).collect()).collect();
            let n_lev = states.len();
            let nb = *n_b;
            let y_top = y.iter().cloned().fold(0.0, f64::max).max(1e-300);

            let mut names: Vec<String> = Vec::new();
            let mut p0: Vec<f64> = Vec::new();
            if *fit_weights {
                for n in 1..=n_lev {
                    names.push(format!("w{n}"));
                    p0.push(y_top / n_lev as f64);
                }
            } else {
                names.push("scale".into());
                p0.push(y_top / n_lev as f64);
            }
            if *fit_kappa {
                names.push("kappa".into());
                p0.push(0.5);
            }
            let fit_w = *fit_weights;
            let fit_k = *fit_kappa;
            let x_index = index_map(x);
            run_fit(x, y, sigma.as_deref(), names, p0, move |p, za| {
                let i = x_index(za);
                let kappa = if fit_k { p[p.len() - 1] } else { 1.0 };
                let mut sum = 0.0;
                for (n, tail_row) in tails.iter().enumerate() {
                    let w = if fit_w { p[n] } else { p[0] };
                    sum += w * (1.0 - kappa * tail_row[i]).max(0.0).powf(nb);
                }
                sum
            })
        }
    }
}

/// Scale guess for power-law-like models: median of y / x^exp.
fn initial_power_scale(x: &[f64], y: &[f64], exponent: f64) -> f64 {
    let mut ratios: Vec<f64> = x
        .iter()
        .zip(y)
        .filter(|(&xi, _)| xi > 0.0)
        .map(|(&xi, &yi)| yi / xi.powf(exponent))
        .collect();
    if ratios.is_empty() {
        return 1.0;
    }
    ratios.sort_by(|a, b| a.total_cmp(b));
    ratios[ratios.len() / 2]
}

/// Maps a z_a value back to its grid index (models above are evaluated
/// only on the data grid, where the tail table is valid).
fn index_map(x: &[f64]) -> impl Fn(f64) -> usize {
    let grid = x.to_vec();
    move |za| {
        grid.iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - za).abs().total_cmp(&(*b - za).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

fn run_fit<F>(
    x: &[f64],
    y: &[f64],
    sigma: Option<&[f64]>,
    names: Vec<String>,
    p0: Vec<f64>,
    model: F,
) -> Result<FitOutcome>
where
    F: Fn(&[f64], f64) -> f64,
{
    let n_par = p0.len();
    if x.len() < n_par + 1 {
        return Err(Error::NotEnoughData { needed: n_par + 1, got: x.len() });
    }

    let weight = |i: usize| sigma.map_or(1.0, |s| 1.0 / s[i]);
    let residuals = |p: &[f64], out: &mut [f64]| {
        for i in 0..x.len() {
            out[i] = (y[i] - model(p, x[i])) * weight(i);
        }
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut p = p0;
    let mut r = vec![0.0; x.len()];
    residuals(&p, &mut r);
    let mut ss = cost(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    let mut jac = vec![vec![0.0; n_par]; x.len()];
    let mut r_trial = vec![0.0; x.len()];

    for iter in 0..MAX_ITERATIONS {
        iterations = iter + 1;
        numeric_jacobian(&mut jac, &p, x.len(), |pp, out| residuals(pp, out));

        // normal equations: (J^T J + lambda diag) delta = J^T r
        let mut jtj = vec![vec![0.0; n_par]; n_par];
        let mut jtr = vec![0.0; n_par];
        for i in 0..x.len() {
            for a in 0..n_par {
                jtr[a] -= jac[i][a] * r[i]; // J here is d(residual)/dp = -d(model)/dp * w
                for b in 0..n_par {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }

        let mut improved = false;
        for _ in 0..12 {
            let mut damped = jtj.clone();
            for (a, row) in damped.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(1e-30);
            }
            let Some(delta) = solve(damped, jtr.clone()) else {
                lambda *= 10.0;
                continue;
            };
            let p_trial: Vec<f64> = p.iter().zip(&delta).map(|(pi, di)| pi - di).collect();
            residuals(&p_trial, &mut r_trial);
            let ss_trial = cost(&r_trial);
            if ss_trial.is_finite() && ss_trial <= ss {
                let rel_step = delta
                    .iter()
                    .zip(&p)
                    .map(|(d, pi)| d.abs() / pi.abs().max(1e-30))
                    .fold(0.0, f64::max);
                p = p_trial;
                r.copy_from_slice(&r_trial);
                ss = ss_trial;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if rel_step < STEP_TOLERANCE {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if converged {
            break;
        }
        if !improved && ss < f64::INFINITY {
            // damping saturated without progress; accept the stall
            converged = ss.is_finite();
            break;
        }
    }

    // covariance s^2 (J^T J)^(-1) at the optimum
    numeric_jacobian(&mut jac, &p, x.len(), |pp, out| residuals(pp, out));
    let mut jtj = vec![vec![0.0; n_par]; n_par];
    for i in 0..x.len() {
        for a in 0..n_par {
            for b in 0..n_par {
                jtj[a][b] += jac[i][a] * jac[i][b];
            }
        }
    }
    let dof = (x.len() - n_par).max(1) as f64;
    let s2 = if sigma.is_some() { 1.0 } else { ss / dof };
    let covariance = invert(jtj)
        .map(|inv| {
            inv.into_iter().map(|row| row.into_iter().map(|v| v * s2).collect()).collect()
        })
        .unwrap_or_else(|| vec![vec![f64::NAN; n_par]; n_par]);

    Ok(FitOutcome {
        names,
        params: p,
        residual_ss: ss,
        covariance,
        iterations,
        converged,
        weighted: sigma.is_some(),
    })
}

fn numeric_jacobian<R>(jac: &mut [Vec<f64>], p: &[f64], n_pts: usize, residuals: R)
where
    R: Fn(&[f64], &mut [f64]),
{
    let n_par = p.len();
    let mut plus = vec![0.0; n_pts];
    let mut minus = vec![0.0; n_pts];
    let mut pp = p.to_vec();
    for a in 0..n_par {
        let h = 1e-6 * p[a].abs().max(1e-12);
        pp[a] = p[a] + h;
        residuals(&pp, &mut plus);
        pp[a] = p[a] - h;
        residuals(&pp, &mut minus);
        pp[a] = p[a];
        for i in 0..n_pts {
            jac[i][a] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

fn invert(a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve(a.clone(), e)?);
    }
    // transpose the solved columns back into rows
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}
