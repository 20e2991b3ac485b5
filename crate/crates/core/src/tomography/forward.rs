// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;

use super::{SettingGrid, TomographySetting};
use crate::dynamics::{self, channel_adjoint, DecoherenceParams, SystemParams};
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::qop::{self, Basis, DensityMatrix, FockTruncation, Operator, QubitOpKind};
use crate::scalar::Real;
use crate::sequences::{displacement_operator, ReadoutError, SimOptions, Simulator};

/// Dynamics assumed for the swap segment when predicting expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseModel {
    Ideal,
    Lindblad,
}

impl NoiseModel {
    pub fn label(&self) -> &'static str {
        match self {
            NoiseModel::Ideal => "ideal",
            NoiseModel::Lindblad => "lindblad",
        }
    }
}

/// Maps a Hermitian matrix to ℝ^{d²} isometrically (Frobenius ↔ Euclidean):
/// diagonal entries, then √2·Re and √2·Im of the strict upper triangle in
/// row-major order. `⟨vec(A), vec(B)⟩ = Tr[A B]` for Hermitian A, B.
pub fn hermitian_to_vec<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let d = m.nrows();
    let s = T::lit(2.0).sqrt();
    let pairs = d * (d - 1) / 2;
    let mut out = vec![T::zero(); d * d];
    let mut k = 0;
    for i in 0..d {
        out[i] = m[(i, i)].re;
        for j in (i + 1)..d {
            out[d + k] = s * m[(i, j)].re;
            out[d + pairs + k] = s * m[(i, j)].im;
            k += 1;
        }
    }
    out
}

pub fn hermitian_from_vec<T: Real>(x: &[T], d: usize) -> CMatrix<T> {
    let s = T::one() / T::lit(2.0).sqrt();
    let pairs = d * (d - 1) / 2;
    let mut m = CMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        m[(i, i)] = Complex::new(x[i], T::zero());
        for j in (i + 1)..d {
            let z = Complex::new(s * x[d + k], s * x[d + pairs + k]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 1;
        }
    }
    m
}

/// Predicts composite observables for a device model.
#[derive(Debug, Clone)]
pub struct ForwardModel<T: Real> {
    sim: Simulator<T>,
    model: NoiseModel,
    readout: ReadoutError<T>,
}

impl<T: Real> ForwardModel<T> {
    pub fn new(system: SystemParams<T>, decoherence: DecoherenceParams<T>, model: NoiseModel) -> Result<Self> {
        let sim = Simulator::new(system, decoherence, SimOptions::default())?;
        Ok(Self { sim, model, readout: ReadoutError::none() })
    }

    /// Folds a readout confusion model into every effect.
    pub fn with_readout(mut self, readout: ReadoutError<T>) -> Self {
        self.readout = readout;
        self
    }

    pub fn noise_model(&self) -> NoiseModel {
        self.model
    }

    pub fn trunc(&self) -> FockTruncation {
        self.sim.trunc()
    }

    pub fn simulator(&self) -> &Simulator<T> {
        &self.sim
    }

    fn readout_projector(&self) -> Operator<T> {
        qop::on_qubit(self.trunc(), &qop::qubit_op(QubitOpKind::ProjectorPlus))
    }

    /// Heisenberg-picture readout projector after a swap of each duration:
    /// S(τ)† Π₊ S(τ), or Φ_τ†(Π₊) under the Lindblad model.
    pub fn evolved_readout(&self, taus: &[T]) -> Result<Vec<Operator<T>>> {
        let proj = self.readout_projector();
        match self.model {
            NoiseModel::Ideal => Ok(taus
                .iter()
                .map(|&t| {
                    let m = proj.conjugate_by_adjoint(&self.sim.swap_unitary(t));
                    Operator::from_square(crate::linalg::hermitian_part(m.matrix()), Basis::MagnonMajor)
                })
                .collect()),
            NoiseModel::Lindblad => {
                let dual = channel_adjoint(self.sim.swap_generator());
                Ok(dynamics::evolve_series(&dual, &proj, taus)?
                    .into_iter()
                    .map(|m| Operator::from_square(crate::linalg::hermitian_part(m.matrix()), Basis::MagnonMajor))
                    .collect())
            }
        }
    }

    /// Pre-swap unitary D_α R on the joint space.
    fn preparation(&self, setting: &TomographySetting<T>) -> Result<Operator<T>> {
        let d = qop::on_magnon(&displacement_operator(self.trunc(), setting.alpha)?);
        let r = qop::on_qubit(self.trunc(), &setting.rotation.unitary());
        Ok(&d * &r)
    }

    fn effect_from_evolved(&self, evolved: &Operator<T>, prep: &Operator<T>) -> Operator<T> {
        let m = evolved.conjugate_by_adjoint(prep);
        let m = Operator::from_square(crate::linalg::hermitian_part(m.matrix()), Basis::MagnonMajor);
        if self.readout.is_ideal() {
            return m;
        }
        let contrast = T::one() - self.readout.g_given_plus - self.readout.plus_given_g;
        let floor = Operator::identity(m.dim(), Basis::MagnonMajor).scale(Complex::new(self.readout.plus_given_g, T::zero()));
        &m.scale(Complex::new(contrast, T::zero())) + &floor
    }

    /// Effect operator M with E = Tr[M ρ] for one setting.
    pub fn composite_observable(&self, setting: &TomographySetting<T>) -> Result<Operator<T>> {
        let evolved = self.evolved_readout(&[setting.tau])?.pop().expect("one time requested");
        Ok(self.effect_from_evolved(&evolved, &self.preparation(setting)?))
    }
}

/// Stacked effect operators for a list of settings, one row per setting in
/// the isometric Hermitian coordinates of [`hermitian_to_vec`].
#[derive(Debug, Clone)]
pub struct DesignMatrix<T: Real> {
    settings: Vec<TomographySetting<T>>,
    rows: DMatrix<T>,
    dim: usize,
    model: NoiseModel,
}

impl<T: Real> DesignMatrix<T> {
    pub fn build(model: &ForwardModel<T>, grid: &SettingGrid<T>) -> Result<Self> {
        Self::from_settings(model, grid.settings())
    }

    /// Evolves the readout projector once per distinct swap time and the
    /// displacement/rotation unitaries once per distinct pair; rows are then
    /// filled in parallel, each independently, so the result does not depend
    /// on the worker count.
    pub fn from_settings(model: &ForwardModel<T>, settings: Vec<TomographySetting<T>>) -> Result<Self> {
        let d = model.trunc().joint_dim();
        let mut taus: Vec<T> = Vec::new();
        let mut tau_index: HashMap<u64, usize> = HashMap::new();
        let mut preps: Vec<Operator<T>> = Vec::new();
        let mut prep_index: HashMap<(u64, u64, super::QubitRotation), usize> = HashMap::new();
        let mut keys = Vec::with_capacity(settings.len());
        for s in &settings {
            let tk = s.tau.as_f64().to_bits();
            let ti = *tau_index.entry(tk).or_insert_with(|| {
                taus.push(s.tau);
                taus.len() - 1
            });
            let pk = (s.alpha.re.as_f64().to_bits(), s.alpha.im.as_f64().to_bits(), s.rotation);
            let pi = match prep_index.get(&pk) {
                Some(&i) => i,
                None => {
                    preps.push(model.preparation(s)?);
                    prep_index.insert(pk, preps.len() - 1);
                    preps.len() - 1
                }
            };
            keys.push((ti, pi));
        }
        let evolved = model.evolved_readout(&taus)?;
        let rows: Vec<Vec<T>> = keys
            .par_iter()
            .map(|&(ti, pi)| hermitian_to_vec(model.effect_from_evolved(&evolved[ti], &preps[pi]).matrix()))
            .collect();
        let flat: Vec<T> = rows.into_iter().flatten().collect();
        let rows = DMatrix::from_row_slice(settings.len(), d * d, &flat);
        Ok(Self { settings, rows, dim: d, model: model.noise_model() })
    }

    pub fn settings(&self) -> &[TomographySetting<T>] {
        &self.settings
    }

    /// n_settings × d² real matrix.
    pub fn rows(&self) -> &DMatrix<T> {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_model(&self) -> NoiseModel {
        self.model
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    /// Effect operator of row `i`.
    pub fn effect(&self, i: usize) -> CMatrix<T> {
        let row: Vec<T> = self.rows.row(i).iter().copied().collect();
        hermitian_from_vec(&row, self.dim)
    }

    /// Tr[M_s ρ] for every row.
    pub fn predict(&self, rho: &DensityMatrix<T>) -> Vec<T> {
        let x = DVector::from_vec(hermitian_to_vec(rho.matrix()));
        (&self.rows * x).iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qop::bell_state;
    use crate::tomography::QubitRotation;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn system(n_max: usize) -> SystemParams<f64> {
        SystemParams::new(TWO_PI * 5.867, TWO_PI * 5.927, TWO_PI * 5.59e-3, FockTruncation::new(n_max).unwrap()).unwrap()
    }

    fn dec() -> DecoherenceParams<f64> {
        DecoherenceParams::from_lifetimes(8000.0, 1000.0, 250.0, 0.0).unwrap()
    }

    fn setting(rotation: QubitRotation, re: f64, im: f64, tau: f64) -> TomographySetting<f64> {
        TomographySetting { rotation, alpha: Complex::new(re, im), tau }
    }

    #[test]
    fn hermitian_coordinates_are_isometric() {
        let a = CMatrix::from_fn(4, 4, |i, j| Complex::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
        let a = crate::linalg::hermitian_part(&a);
        let b = CMatrix::from_fn(4, 4, |i, j| Complex::new((i + 2 * j) as f64 * 0.3, (j as f64 - i as f64) * 0.7));
        let b = crate::linalg::hermitian_part(&b);
        let va = hermitian_to_vec(&a);
        let vb = hermitian_to_vec(&b);
        let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        assert!((dot - qop::trace_product(&a, &b).re).abs() < 1e-13);
        assert!(crate::linalg::max_abs_diff(&hermitian_from_vec(&va, 4), &a) < 1e-15);
    }

    #[test]
    fn trivial_setting_is_readout_projector() {
        let m = ForwardModel::new(system(4), dec(), NoiseModel::Lindblad).unwrap();
        let e = m.composite_observable(&setting(QubitRotation::Identity, 0.0, 0.0, 0.0)).unwrap();
        let proj = qop::on_qubit(m.trunc(), &qop::qubit_op(QubitOpKind::ProjectorPlus));
        assert!(crate::linalg::max_abs_diff(e.matrix(), proj.matrix()) < 1e-15);
        let bell = bell_state::<f64>(m.trunc()).to_density();
        assert!((bell.expectation(&e) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ideal_effects_are_projectors() {
        let m = ForwardModel::new(system(10), dec(), NoiseModel::Ideal).unwrap();
        for (k, rot) in QubitRotation::ALL.iter().enumerate() {
            let s = setting(*rot, 0.625 - 0.25 * k as f64, -0.375, 57.0 + 40.0 * k as f64);
            let ev = m.composite_observable(&s).unwrap().eigenvalues_hermitian();
            for v in ev {
                assert!(v.abs() < 1e-10 || (v - 1.0).abs() < 1e-10, "eigenvalue {v}");
            }
        }
    }

    #[test]
    fn lindblad_effects_lie_between_zero_and_identity() {
        let m = ForwardModel::new(system(10), dec(), NoiseModel::Lindblad).unwrap();
        let grid = SettingGrid::<f64>::standard();
        let all = grid.settings();
        // Deterministic spread of 100 settings over the grid.
        for k in 0..100 {
            let s = all[(k * 7919) % all.len()];
            let ev = m.composite_observable(&s).unwrap().eigenvalues_hermitian();
            assert!(ev[0] > -1e-9, "min {}", ev[0]);
            assert!(ev[ev.len() - 1] < 1.0 + 1e-9, "max {}", ev[ev.len() - 1]);
        }
    }

    #[test]
    fn design_rows_match_composite_observables() {
        let m = ForwardModel::new(system(5), dec(), NoiseModel::Lindblad).unwrap();
        let grid = SettingGrid::new(
            QubitRotation::ALL.to_vec(),
            vec![Complex::new(0.125, 0.125), Complex::new(-0.375, 0.25)],
            vec![0.0, 3.0, 9.0, 21.0],
        )
        .unwrap();
        let design = DesignMatrix::build(&m, &grid).unwrap();
        assert_eq!(design.len(), 24);
        for (i, s) in grid.settings().iter().enumerate() {
            let direct = m.composite_observable(s).unwrap();
            assert!(crate::linalg::max_abs_diff(&design.effect(i), direct.matrix()) < 1e-12);
        }
        let mixed = DensityMatrix::maximally_mixed(12, Basis::MagnonMajor);
        assert!(design.predict(&mixed).iter().all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p)));
    }

    #[test]
    fn readout_error_rescales_effects() {
        let r = ReadoutError::new(0.03, 0.08).unwrap();
        let m = ForwardModel::new(system(3), DecoherenceParams::none(), NoiseModel::Ideal).unwrap().with_readout(r);
        let s = setting(QubitRotation::XHalf, 0.25, 0.0, 12.0);
        let bell = bell_state::<f64>(m.trunc()).to_density();
        let plain = ForwardModel::new(system(3), DecoherenceParams::none(), NoiseModel::Ideal).unwrap();
        let p = bell.expectation(&plain.composite_observable(&s).unwrap());
        let q = bell.expectation(&m.composite_observable(&s).unwrap());
        assert!((q - r.apply(p)).abs() < 1e-14);
    }
}
