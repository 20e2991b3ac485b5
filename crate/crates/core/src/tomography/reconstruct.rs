// SPDX-License-Identifier: Apache-2.0

//! Constrained least-squares state reconstruction.
//!
//! Minimizes ½ mean_s w_s (Tr[M_s ρ] − e_s)² over density matrices with a
//! monotone accelerated projected gradient method. The quadratic is
//! precomputed as a d² × d² Gram matrix, so an iteration costs one
//! matrix-vector product plus one d × d eigendecomposition for the
//! projection onto the PSD unit-trace set.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::dataset::{MeasurementRecord, Shots};
use super::forward::{hermitian_from_vec, hermitian_to_vec, DesignMatrix};
use super::metrics::fidelity;
use crate::error::{Error, Result};
use crate::linalg;
use crate::qop::{bell_state, Basis, DensityMatrix, FockTruncation, PureState};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Uniform,
    /// 1/variance of the binomial estimate, floored to keep near-certain
    /// outcomes from dominating.
    BinomialVariance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T: Real> {
    pub max_iterations: usize,
    /// Stop once the gradient-map norm drops below this.
    pub tolerance: T,
    /// Gram eigenvalues below `rank_tolerance · λ_max` count as zero.
    pub rank_tolerance: T,
    pub weighting: Weighting,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            tolerance: T::lit(1e-9),
            rank_tolerance: T::lit(1e-12),
            weighting: Weighting::Uniform,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult<T: Real> {
    pub rho_hat: DensityMatrix<T>,
    /// √⟨ψ|ρ̂|ψ⟩ against the reconstructor's target state.
    pub fidelity: T,
    pub purity_qubit: T,
    /// Root-mean-square misfit between predicted and recorded values.
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every iteration (non-increasing).
    pub objective_history: Vec<T>,
}

/// Gram-matrix form of the least-squares problem for one design and one set
/// of weights; reusable across datasets (e.g. bootstrap resamples).
#[derive(Debug, Clone)]
pub struct Reconstructor<'a, T: Real> {
    design: &'a DesignMatrix<T>,
    weights: Vec<T>,
    gram: DMatrix<T>,
    lipschitz: T,
    rank: usize,
    options: SolverOptions<T>,
    target: PureState<T>,
}

impl<'a, T: Real> Reconstructor<'a, T> {
    /// Fails with [`Error::RankDeficient`] when the weighted design does not
    /// identify every Hermitian direction.
    pub fn new(design: &'a DesignMatrix<T>, weights: Option<Vec<T>>, options: SolverOptions<T>) -> Result<Self> {
        let n = design.len();
        let weights = weights.unwrap_or_else(|| vec![T::one(); n]);
        if weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
        }
        let inv_n = T::one() / T::lit(n as f64);
        let mut weighted = design.rows().clone();
        for (mut row, w) in weighted.row_iter_mut().zip(&weights) {
            row *= *w * inv_n;
        }
        let gram = design.rows().transpose() * weighted;
        let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
        let lmax = eig.iter().copied().fold(T::zero(), |m, v| if v > m { v } else { m });
        let cutoff = options.rank_tolerance * lmax;
        let rank = eig.iter().filter(|v| **v > cutoff).count();
        let required = design.dim() * design.dim();
        if rank < required {
            return Err(Error::RankDeficient { rank, required, unidentified: required - rank });
        }
        let trunc = FockTruncation::from_joint_dim(design.dim())?;
        Ok(Self { design, weights, gram, lipschitz: lmax, rank, options, target: bell_state(trunc) })
    }

    /// Weights for the chosen scheme, derived from the records.
    pub fn weights_for(records: &[MeasurementRecord<T>], weighting: Weighting) -> Option<Vec<T>> {
        match weighting {
            Weighting::Uniform => None,
            Weighting::BinomialVariance => {
                let floor = T::lit(1e-3);
                let raw: Vec<T> = records
                    .iter()
                    .map(|r| {
                        let var = (r.e_value * (T::one() - r.e_value)).max(floor);
                        let n = match r.shots {
                            Shots::Exact => T::one(),
                            Shots::Finite(k) => T::lit(k as f64),
                        };
                        n / var
                    })
                    .collect();
                let mean = raw.iter().fold(T::zero(), |a, b| a + *b) / T::lit(raw.len().max(1) as f64);
                Some(raw.into_iter().map(|w| w / mean).collect())
            }
        }
    }

    pub fn with_target(mut self, target: PureState<T>) -> Result<Self> {
        if target.dim() != self.design.dim() {
            return Err(Error::DimensionMismatch { expected: self.design.dim(), found: target.dim() });
        }
        self.target = target;
        Ok(self)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    fn project(&self, x: &DVector<T>) -> DVector<T> {
        let d = self.design.dim();
        let m = linalg::project_density(&hermitian_from_vec(x.as_slice(), d));
        DVector::from_vec(hermitian_to_vec(&m))
    }

    /// Runs the solver on one vector of recorded expectation values.
    pub fn solve(&self, values: &[T]) -> Result<ReconstructionResult<T>> {
        let n = self.design.len();
        if values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: values.len() });
        }
        let d = self.design.dim();
        let inv_n = T::one() / T::lit(n as f64);
        let we = DVector::from_iterator(n, values.iter().zip(&self.weights).map(|(e, w)| *e * *w * inv_n));
        let b = self.design.rows().transpose() * &we;
        let c = values.iter().zip(&self.weights).fold(T::zero(), |acc, (e, w)| acc + *w * *e * *e) * inv_n
            / T::lit(2.0);
        let half = T::lit(0.5);
        let objective = |x: &DVector<T>, gx: &DVector<T>| half * x.dot(gx) - b.dot(x) + c;
        let step = T::one() / self.lipschitz;

        let start = DensityMatrix::<T>::maximally_mixed(d, Basis::MagnonMajor);
        let mut x = DVector::from_vec(hermitian_to_vec(start.matrix()));
        let mut gx = &self.gram * &x;
        let mut fx = objective(&x, &gx);
        let mut y = x.clone();
        let mut gy = gx.clone();
        let mut t = T::one();
        let mut history = Vec::new();
        let mut converged = false;
        let mut iterations = 0;

        for k in 1..=self.options.max_iterations {
            iterations = k;
            let grad = &gy - &b;
            let z = self.project(&(&y - grad * step));
            let gz = &self.gram * &z;
            let fz = objective(&z, &gz);
            let grad_map = (&y - &z).norm() * self.lipschitz;

            let x_prev = x.clone();
            let gx_prev = gx.clone();
            if fz <= fx {
                x = z.clone();
                gx = gz.clone();
                fx = fz;
            }
            history.push(fx);
            if grad_map < self.options.tolerance {
                converged = true;
                break;
            }
            // Restart the momentum once it points uphill.
            if (&y - &z).dot(&(&z - &x_prev)) > T::zero() {
                t = T::one();
            }
            let t_next = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
            let a = t / t_next;
            let m = (t - T::one()) / t_next;
            y = &x + (&z - &x) * a + (&x - &x_prev) * m;
            if k % 256 == 0 {
                gy = &self.gram * &y;
            } else {
                gy = &gx + (&gz - &gx) * a + (&gx - &gx_prev) * m;
            }
            t = t_next;
        }

        let rho_hat = DensityMatrix::project(&hermitian_from_vec(x.as_slice(), d), Basis::MagnonMajor);
        let predicted = self.design.rows() * DVector::from_vec(hermitian_to_vec(rho_hat.matrix()));
        let sq = predicted.iter().zip(values).fold(T::zero(), |acc, (p, e)| acc + (*p - *e) * (*p - *e));
        let residual = (sq * inv_n).sqrt();
        let trunc = FockTruncation::from_joint_dim(d)?;
        let purity_qubit = rho_hat.partial_trace_magnon(trunc)?.purity();
        let fid = fidelity(&rho_hat, &self.target)?;
        Ok(ReconstructionResult {
            rho_hat,
            fidelity: fid,
            purity_qubit,
            residual,
            iterations,
            converged,
            objective_history: history,
        })
    }
}

/// Reconstructs ρ from records whose settings follow the design's order.
pub fn reconstruct<T: Real>(
    records: &[MeasurementRecord<T>],
    design: &DesignMatrix<T>,
    options: SolverOptions<T>,
) -> Result<ReconstructionResult<T>> {
    if records.len() != design.len() {
        return Err(Error::DimensionMismatch { expected: design.len(), found: records.len() });
    }
    if let Some(index) = records.iter().zip(design.settings()).position(|(r, s)| r.setting != *s) {
        return Err(Error::SettingMismatch { index });
    }
    let weights = Reconstructor::weights_for(records, options.weighting);
    let solver = Reconstructor::new(design, weights, options)?;
    let values: Vec<T> = records.iter().map(|r| r.e_value).collect();
    solver.solve(&values)
}
