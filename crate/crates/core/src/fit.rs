// SPDX-License-Identifier: Apache-2.0

//! Damped-cosine fit for oscillation curves.
//!
//! Model: y(τ) = c0 e^{−βτ} + e^{−γτ}(c1 cos ωτ + c2 sin ωτ). The offset gets
//! its own decay because lossy swaps drain the mean population while the
//! oscillation dephases. For fixed (ω, γ, β) the coefficients solve a 3×3
//! linear least-squares problem, so only the nonlinear parameters are
//! searched: a coarse grid, then Nelder-Mead.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedCosine {
    /// Angular frequency in rad per time unit of the input.
    pub omega: f64,
    /// Envelope decay rate in 1 per time unit of the input.
    pub gamma: f64,
    pub offset: f64,
    /// Decay rate of the offset term.
    pub offset_decay: f64,
    pub cos_amp: f64,
    pub sin_amp: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

impl DampedCosine {
    pub fn eval(&self, t: f64) -> f64 {
        let env = (-self.gamma * t).exp();
        self.offset * (-self.offset_decay * t).exp() + env * (self.cos_amp * (self.omega * t).cos() + self.sin_amp * (self.omega * t).sin())
    }

    /// Ordinary frequency ω/2π; MHz when times are in ns and scaled by 1e3.
    pub fn frequency(&self) -> f64 {
        self.omega / (2.0 * PI)
    }

    pub fn amplitude(&self) -> f64 {
        self.cos_amp.hypot(self.sin_amp)
    }
}

fn basis_row(t: f64, p: [f64; 3]) -> Vector3<f64> {
    let [omega, gamma, beta] = p;
    let env = (-gamma * t).exp();
    Vector3::new((-beta * t).exp(), env * (omega * t).cos(), env * (omega * t).sin())
}

fn linear_part(ts: &[f64], ys: &[f64], p: [f64; 3]) -> Option<(Vector3<f64>, f64)> {
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for (&t, &y) in ts.iter().zip(ys) {
        let row = basis_row(t, p);
        ata += row * row.transpose();
        aty += row * y;
    }
    let c = ata.cholesky()?.solve(&aty);
    let sse = ts
        .iter()
        .zip(ys)
        .map(|(&t, &y)| {
            let r = basis_row(t, p).dot(&c) - y;
            r * r
        })
        .sum();
    Some((c, sse))
}

fn nelder_mead<const N: usize, F: Fn([f64; N]) -> f64>(f: F, start: [f64; N], scale: [f64; N], iters: usize) -> [f64; N] {
    let mut simplex: Vec<[f64; N]> = (0..=N)
        .map(|k| {
            let mut p = start;
            if k > 0 {
                p[k - 1] += scale[k - 1];
            }
            p
        })
        .collect();
    let mut vals: Vec<f64> = simplex.iter().map(|p| f(*p)).collect();
    let lerp = |a: &[f64; N], b: &[f64; N], s: f64| std::array::from_fn(|i| a[i] + s * (b[i] - a[i]));
    for _ in 0..iters {
        let mut idx: Vec<usize> = (0..=N).collect();
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = idx.iter().map(|&i| simplex[i]).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[N] - vals[0]).abs() <= 1e-15 * vals[0].abs().max(1e-300) {
            break;
        }
        let centroid: [f64; N] = std::array::from_fn(|i| simplex[..N].iter().map(|p| p[i]).sum::<f64>() / N as f64);
        let reflected = lerp(&centroid, &simplex[N], -1.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = lerp(&centroid, &simplex[N], -2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[N] = expanded;
                vals[N] = fe;
            } else {
                simplex[N] = reflected;
                vals[N] = fr;
            }
        } else if fr < vals[N - 1] {
            simplex[N] = reflected;
            vals[N] = fr;
        } else {
            let contracted = lerp(&centroid, &simplex[N], 0.5);
            let fc = f(contracted);
            if fc < vals[N] {
                simplex[N] = contracted;
                vals[N] = fc;
            } else {
                for k in 1..=N {
                    simplex[k] = lerp(&simplex[0], &simplex[k], 0.5);
                    vals[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..=N).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    simplex[best]
}

/// Fits the damped cosine. The frequency search covers (0, π/Δt_min), the
/// Nyquist band of the sampling; both decay rates are searched from zero up
/// to a few inverse spans and kept non-negative.
pub fn fit_damped_cosine(ts: &[f64], ys: &[f64]) -> Result<DampedCosine> {
    if ts.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: ts.len(), found: ys.len() });
    }
    if ts.len() < 6 {
        return Err(Error::InvalidParameter { name: "samples", reason: "need at least 6 points".into() });
    }
    let mut sorted: Vec<f64> = ts.to_vec();
    sorted.sort_by(f64::total_cmp);
    let span = sorted[sorted.len() - 1] - sorted[0];
    let dt = sorted.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    if span.is_nan() || span <= 0.0 || !dt.is_finite() {
        return Err(Error::InvalidParameter { name: "samples", reason: "times must span an interval".into() });
    }

    let cost = |p: [f64; 3]| -> f64 {
        if p[0] <= 0.0 || p[1] < 0.0 || p[2] < 0.0 {
            return f64::INFINITY;
        }
        linear_part(ts, ys, p).map_or(f64::INFINITY, |(_, sse)| sse)
    };

    let omega_max = PI / dt;
    let omega_step = PI / (4.0 * span);
    let gammas: Vec<f64> = (0..=20).map(|k| k as f64 * 0.25 / span).collect();
    let betas: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25 / span).collect();
    let mut best = ([omega_step, 0.0, 0.0], f64::INFINITY);
    let mut omega = omega_step;
    while omega < omega_max {
        for &g in &gammas {
            for &b in &betas {
                let c = cost([omega, g, b]);
                if c < best.1 {
                    best = ([omega, g, b], c);
                }
            }
        }
        omega += omega_step;
    }

    let scale = [omega_step * 0.5, 0.25 / span, 0.25 / span];
    let mut p = best.0;
    // Restarting refreshes a simplex that collapsed early.
    for _ in 0..3 {
        p = nelder_mead(cost, p, scale, 4000);
    }
    let (c, sse) = linear_part(ts, ys, p)
        .ok_or(Error::InvalidParameter { name: "samples", reason: "degenerate fit".into() })?;
    Ok(DampedCosine {
        omega: p[0],
        gamma: p[1],
        offset: c[0],
        offset_decay: p[2],
        cos_amp: c[1],
        sin_amp: c[2],
        rms: (sse / ts.len() as f64).sqrt(),
    })
}
