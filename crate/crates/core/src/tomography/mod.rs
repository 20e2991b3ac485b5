// SPDX-License-Identifier: Apache-2.0

//! Joint qubit-magnon tomography using qubit readout only.
//!
//! Each setting applies a qubit rotation R, a magnon displacement D_α and a
//! resonant swap S(τ) before reading P₊, so the measured operator is the
//! composite effect M = T† Π₊ T with T = S(τ) D_α R (or its Lindblad
//! generalization). Stacking all effects gives a linear map from the state
//! to the expectation vector, which is inverted under the density-matrix
//! constraints.

mod dataset;
mod forward;
pub mod io;
mod metrics;
mod reconstruct;

pub use dataset::{bootstrap_error, simulate_dataset, BootstrapSummary, MeasurementRecord, Shots};
pub use forward::{hermitian_from_vec, hermitian_to_vec, DesignMatrix, ForwardModel, NoiseModel};
pub use metrics::{display_block, fidelity, purity, state_fidelity};
pub use reconstruct::{reconstruct, ReconstructionResult, Reconstructor, SolverOptions, Weighting};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qop::Operator;
use crate::scalar::Real;
use crate::sequences::rotation_unitary;

/// Pre-rotation applied to the qubit before displacement and swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitRotation {
    Identity,
    XHalf,
    YHalf,
}

impl QubitRotation {
    pub const ALL: [QubitRotation; 3] = [QubitRotation::Identity, QubitRotation::XHalf, QubitRotation::YHalf];

    pub fn label(&self) -> &'static str {
        match self {
            QubitRotation::Identity => "I",
            QubitRotation::XHalf => "Rx_half",
            QubitRotation::YHalf => "Ry_half",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.label() == label)
    }

    pub fn unitary<T: Real>(&self) -> Operator<T> {
        let (axis, angle) = match self {
            QubitRotation::Identity => ([T::one(), T::zero(), T::zero()], T::zero()),
            QubitRotation::XHalf => ([T::one(), T::zero(), T::zero()], T::frac_pi_2()),
            QubitRotation::YHalf => ([T::zero(), T::one(), T::zero()], T::frac_pi_2()),
        };
        rotation_unitary(axis, angle).expect("unit axis")
    }
}

/// One composite observable: rotation, displacement amplitude, swap time (ns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographySetting<T: Real> {
    pub rotation: QubitRotation,
    pub alpha: Complex<T>,
    pub tau: T,
}

/// Cartesian product rotations × displacements × swap times.
///
/// Settings are ordered rotation-major, then displacement, then swap time,
/// so each run of consecutive settings is one swap curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingGrid<T: Real> {
    pub rotations: Vec<QubitRotation>,
    pub alphas: Vec<Complex<T>>,
    pub taus: Vec<T>,
}

impl<T: Real> SettingGrid<T> {
    pub fn new(rotations: Vec<QubitRotation>, alphas: Vec<Complex<T>>, taus: Vec<T>) -> Result<Self> {
        if rotations.is_empty() || alphas.is_empty() || taus.is_empty() {
            return Err(Error::InvalidParameter { name: "grid", reason: "every axis needs at least one entry".into() });
        }
        if let Some(t) = taus.iter().find(|t| **t < T::zero()) {
            return Err(Error::NegativeParameter { name: "tau", value: t.as_f64() });
        }
        Ok(Self { rotations, alphas, taus })
    }

    /// Square displacement lattice with `per_side` points per axis centred on
    /// zero, and `tau_count` equally spaced swap times on `[0, tau_max]`.
    pub fn uniform(per_side: usize, alpha_step: T, tau_max: T, tau_count: usize) -> Result<Self> {
        if per_side == 0 || tau_count == 0 {
            return Err(Error::InvalidParameter { name: "grid", reason: "empty axis".into() });
        }
        let offset = T::lit((per_side as f64 - 1.0) / 2.0);
        let coord = |k: usize| (T::lit(k as f64) - offset) * alpha_step;
        // Rows run along Im α from bottom to top, points in a row along Re α.
        let alphas = (0..per_side)
            .flat_map(|row| (0..per_side).map(move |col| (row, col)))
            .map(|(row, col)| Complex::new(coord(col), coord(row)))
            .collect();
        let taus = if tau_count == 1 {
            vec![T::zero()]
        } else {
            let step = tau_max / T::lit((tau_count - 1) as f64);
            (0..tau_count).map(|k| T::lit(k as f64) * step).collect()
        };
        Self::new(QubitRotation::ALL.to_vec(), alphas, taus)
    }

    /// 3 rotations × 8×8 displacements on ±0.875 (step 0.25) × 61 swap
    /// times over 0–180 ns: 11712 settings.
    pub fn standard() -> Self {
        Self::uniform(8, T::lit(0.25), T::lit(180.0), 61).expect("standard grid is valid")
    }

    pub fn len(&self) -> usize {
        self.rotations.len() * self.alphas.len() * self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn settings(&self) -> Vec<TomographySetting<T>> {
        let mut out = Vec::with_capacity(self.len());
        for &rotation in &self.rotations {
            for &alpha in &self.alphas {
                for &tau in &self.taus {
                    out.push(TomographySetting { rotation, alpha, tau });
                }
            }
        }
        out
    }

    pub fn max_alpha_abs(&self) -> T {
        use nalgebra::ComplexField;
        self.alphas.iter().map(|a| a.modulus()).fold(T::zero(), |m, v| if v > m { v } else { m })
    }
}
