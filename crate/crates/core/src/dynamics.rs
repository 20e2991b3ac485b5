// SPDX-License-Identifier: Apache-2.0

//! Jaynes-Cummings Hamiltonian, unitary propagation, and Lindblad evolution
//! in vectorized (superoperator) form.
//!
//! Units: angular frequencies in rad/ns, times in ns, rates in 1/ns.
//! Operators are vectorized by stacking columns, so `vec(A X B) =
//! (Bᵀ ⊗ A) vec(X)`; this matches nalgebra's column-major storage.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::qop::{self, Basis, DensityMatrix, FockTruncation, Operator, QubitOpKind};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T: Real> {
    pub omega_q: T,
    pub omega_m: T,
    pub g_mq: T,
    pub trunc: FockTruncation,
}

impl<T: Real> SystemParams<T> {
    pub fn new(omega_q: T, omega_m: T, g_mq: T, trunc: FockTruncation) -> Result<Self> {
        if g_mq <= T::zero() {
            return Err(Error::InvalidParameter { name: "g_mq", reason: "must be positive".into() });
        }
        if omega_m <= T::zero() {
            return Err(Error::InvalidParameter { name: "omega_m", reason: "must be positive".into() });
        }
        Ok(Self { omega_q, omega_m, g_mq, trunc })
    }

    /// ω_q − ω_m.
    pub fn detuning(&self) -> T {
        self.omega_q - self.omega_m
    }

    /// Same system with the qubit moved to `omega_q`.
    pub fn with_qubit_frequency(&self, omega_q: T) -> Self {
        Self { omega_q, ..*self }
    }

    /// π/(4 g_mq): resonant swap time that prepares the Bell state.
    pub fn bell_time(&self) -> T {
        T::pi() / (T::lit(4.0) * self.g_mq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceParams<T: Real> {
    pub gamma1_q: T,
    pub gamma_phi_q: T,
    pub kappa_m: T,
    pub n_thermal: T,
}

impl<T: Real> DecoherenceParams<T> {
    pub fn new(gamma1_q: T, gamma_phi_q: T, kappa_m: T, n_thermal: T) -> Result<Self> {
        for (name, value) in [
            ("gamma1_q", gamma1_q),
            ("gamma_phi_q", gamma_phi_q),
            ("kappa_m", kappa_m),
            ("n_thermal", n_thermal),
        ] {
            if value < T::zero() {
                return Err(Error::NegativeParameter { name, value: value.as_f64() });
            }
        }
        Ok(Self { gamma1_q, gamma_phi_q, kappa_m, n_thermal })
    }

    pub fn none() -> Self {
        Self { gamma1_q: T::zero(), gamma_phi_q: T::zero(), kappa_m: T::zero(), n_thermal: T::zero() }
    }

    /// Rates from lifetimes in ns; an infinite lifetime disables the channel.
    /// γφ = 1/T2 − 1/(2 T1).
    pub fn from_lifetimes(t1_q: T, t2_q: T, magnon_lifetime: T, n_thermal: T) -> Result<Self> {
        let inv = |t: T| if t.is_finite() { T::one() / t } else { T::zero() };
        let gamma1 = inv(t1_q);
        let gamma_phi = inv(t2_q) - gamma1 / T::lit(2.0);
        if gamma_phi < -T::lit(1e-15) {
            return Err(Error::InvalidParameter { name: "t2_q", reason: "T2 exceeds 2 T1".into() });
        }
        Self::new(gamma1, gamma_phi.max(T::zero()), inv(magnon_lifetime), n_thermal)
    }

    pub fn is_noiseless(&self) -> bool {
        self.gamma1_q == T::zero() && self.gamma_phi_q == T::zero() && self.kappa_m == T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    RotatingAtMagnon,
}

/// H/ħ = ½ω_q σ_z + ω_m a†a + g(σ+ a + σ− a†); in the frame rotating at ω_m
/// the bare terms reduce to ½(ω_q − ω_m) σ_z.
pub fn jc_hamiltonian<T: Real>(p: &SystemParams<T>, frame: Frame) -> Operator<T> {
    let t = p.trunc;
    let a = qop::annihilation::<T>(t);
    let ad = a.adjoint();
    let sz = qop::on_qubit(t, &qop::qubit_op(QubitOpKind::SigmaZ));
    let sp = qop::qubit_op::<T>(QubitOpKind::SigmaPlus);
    let sm = qop::qubit_op::<T>(QubitOpKind::SigmaMinus);
    let exchange = &qop::tensor(&a, &sp) + &qop::tensor(&ad, &sm);
    let r = |x: T| Complex::new(x, T::zero());
    let half = T::lit(0.5);
    let mut h = exchange.scale(r(p.g_mq));
    match frame {
        Frame::Lab => {
            h = &h + &sz.scale(r(half * p.omega_q));
            h = &h + &qop::on_magnon(&qop::number(t)).scale(r(p.omega_m));
        }
        Frame::RotatingAtMagnon => {
            h = &h + &sz.scale(r(half * p.detuning()));
        }
    }
    h
}

fn check_hermitian<T: Real>(h: &Operator<T>) -> Result<()> {
    let scale = linalg::one_norm(h.matrix()).max(T::one());
    let dev = h.hermitian_deviation();
    if dev > T::hermitian_tol() * scale {
        return Err(Error::NotHermitian(dev.as_f64()));
    }
    Ok(())
}

/// exp(−iHt) through the Hermitian eigendecomposition of H.
pub fn unitary_propagator<T: Real>(h: &Operator<T>, t: T) -> Result<Operator<T>> {
    check_hermitian(h)?;
    let (values, vectors) = linalg::eigh(&linalg::hermitian_part(h.matrix()));
    let u = linalg::hermitian_function(&values, &vectors, |lam| {
        let phase = -lam * t;
        Complex::new(phase.cos(), phase.sin())
    });
    Operator::new(u, h.basis())
}

/// Linear map on operators, stored as a d² × d² matrix acting on
/// column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator<T: Real> {
    matrix: CMatrix<T>,
    dim: usize,
    basis: Basis,
}

impl<T: Real> Superoperator<T> {
    pub fn new(matrix: CMatrix<T>, dim: usize, basis: Basis) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.nrows() });
        }
        Ok(Self { matrix, dim, basis })
    }

    pub fn identity(dim: usize, basis: Basis) -> Self {
        Self { matrix: linalg::identity(dim * dim), dim, basis }
    }

    /// X ↦ U X U†, i.e. conj(U) ⊗ U.
    pub fn from_unitary(u: &Operator<T>) -> Self {
        let m = linalg::kron(&u.matrix().map(|z| z.conj()), u.matrix());
        Self { matrix: m, dim: u.dim(), basis: u.basis() }
    }

    /// Hilbert-space dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn apply(&self, x: &Operator<T>) -> Operator<T> {
        let v = linalg::cmatvec(&self.matrix, x.matrix().as_slice());
        Operator::from_square(CMatrix::from_vec(self.dim, self.dim, v), x.basis())
    }

    pub fn apply_state(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        DensityMatrix::from_evolved(self.apply(rho.op()))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Superoperator<T>) -> Self {
        Self {
            matrix: linalg::cmatmul(&self.matrix, &first.matrix),
            dim: self.dim,
            basis: self.basis,
        }
    }

    /// Largest deviation of vecᵀ(I)·S from vecᵀ(I); zero for trace-preserving
    /// maps (and for generators, which must annihilate the trace functional
    /// once the identity row is subtracted by the caller).
    pub fn trace_functional(&self) -> Vec<Complex<T>> {
        let d = self.dim;
        (0..d * d)
            .map(|col| (0..d).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + self.matrix[(k + d * k, col)]))
            .collect()
    }

    pub fn trace_preservation_error(&self) -> T {
        let d = self.dim;
        self.trace_functional()
            .iter()
            .enumerate()
            .map(|(col, z)| {
                let target = if col % d == col / d { T::one() } else { T::zero() };
                (*z - Complex::new(target, T::zero())).modulus()
            })
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    /// Choi matrix Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|).
    pub fn choi(&self) -> CMatrix<T> {
        let d = self.dim;
        CMatrix::from_fn(d * d, d * d, |r, c| {
            let (i, k) = (r / d, r % d);
            let (j, l) = (c / d, c % d);
            self.matrix[(k + d * l, i + d * j)]
        })
    }

    pub fn choi_min_eigenvalue(&self) -> T {
        linalg::eigvalsh(&linalg::hermitian_part(&self.choi()))[0]
    }
}

/// Dual map Φ† with Tr[A Φ(ρ)] = Tr[Φ†(A) ρ] for Hermiticity-preserving Φ.
pub fn channel_adjoint<T: Real>(phi: &Superoperator<T>) -> Superoperator<T> {
    Superoperator { matrix: phi.matrix.adjoint(), dim: phi.dim, basis: phi.basis }
}

/// Collapse operators with their rates, in the joint space.
pub fn collapse_operators<T: Real>(
    trunc: FockTruncation,
    dec: &DecoherenceParams<T>,
) -> Vec<Operator<T>> {
    let r = |x: T| Complex::new(x.sqrt(), T::zero());
    let mut out = Vec::new();
    if dec.gamma1_q > T::zero() {
        let sm = qop::on_qubit(trunc, &qop::qubit_op(QubitOpKind::SigmaMinus));
        out.push(sm.scale(r(dec.gamma1_q)));
    }
    if dec.gamma_phi_q > T::zero() {
        let sz = qop::on_qubit(trunc, &qop::qubit_op(QubitOpKind::SigmaZ));
        out.push(sz.scale(r(dec.gamma_phi_q / T::lit(2.0))));
    }
    if dec.kappa_m > T::zero() {
        let a = qop::on_magnon(&qop::annihilation(trunc));
        out.push(a.scale(r(dec.kappa_m * (dec.n_thermal + T::one()))));
        if dec.n_thermal > T::zero() {
            let ad = qop::on_magnon(&qop::creation(trunc));
            out.push(ad.scale(r(dec.kappa_m * dec.n_thermal)));
        }
    }
    out
}

/// Lindblad generator L with d vec(ρ)/dt = L vec(ρ).
pub fn liouvillian<T: Real>(h: &Operator<T>, dec: &DecoherenceParams<T>) -> Result<Superoperator<T>> {
    check_hermitian(h)?;
    let dec = DecoherenceParams::new(dec.gamma1_q, dec.gamma_phi_q, dec.kappa_m, dec.n_thermal)?;
    let d = h.dim();
    let id = linalg::identity::<T>(d);
    let hm = h.matrix();
    let minus_i = Complex::new(T::zero(), -T::one());
    let mut l = (linalg::kron(&id, hm) - linalg::kron(&hm.transpose(), &id)).map(|z| z * minus_i);
    if !dec.is_noiseless() {
        let trunc = FockTruncation::from_joint_dim(d)?;
        let half = Complex::new(T::lit(0.5), T::zero());
        for c in collapse_operators(trunc, &dec) {
            let cm = c.matrix();
            let cdc = linalg::cmatmul(&cm.adjoint(), cm);
            l += linalg::kron(&cm.map(|z| z.conj()), cm);
            l -= linalg::kron(&id, &cdc).map(|z| z * half);
            l -= linalg::kron(&cdc.transpose(), &id).map(|z| z * half);
        }
    }
    Superoperator::new(l, d, h.basis())
}

/// exp(L t).
pub fn channel_propagator<T: Real>(l: &Superoperator<T>, t: T) -> Result<Superoperator<T>> {
    if t < T::zero() {
        return Err(Error::NegativeParameter { name: "duration", value: t.as_f64() });
    }
    if t == T::zero() {
        return Ok(Superoperator::identity(l.dim, l.basis));
    }
    let scaled = l.matrix.map(|z| z * Complex::new(t, T::zero()));
    Ok(Superoperator { matrix: linalg::expm(&scaled), dim: l.dim, basis: l.basis })
}

/// Fixed-step classical Runge-Kutta integration of d vec(ρ)/dt = L vec(ρ).
///
/// The interval is split into the smallest number of equal steps not longer
/// than `dt`.
pub fn evolve_rk4<T: Real>(
    l: &Superoperator<T>,
    rho0: &DensityMatrix<T>,
    t: T,
    dt: T,
) -> Result<DensityMatrix<T>> {
    if dt <= T::zero() {
        return Err(Error::NonPositiveStep(dt.as_f64()));
    }
    if dt > t {
        return Err(Error::InvalidParameter { name: "dt", reason: "step exceeds the duration".into() });
    }
    let steps = (t / dt).ceil().as_f64().max(1.0) as usize;
    let h = t / T::lit(steps as f64);
    let half = Complex::new(h / T::lit(2.0), T::zero());
    let hc = Complex::new(h, T::zero());
    let sixth = Complex::new(h / T::lit(6.0), T::zero());
    let two = Complex::new(T::lit(2.0), T::zero());
    let m = &l.matrix;
    let mut y: Vec<Complex<T>> = rho0.matrix().as_slice().to_vec();
    let axpy = |y: &[Complex<T>], k: &[Complex<T>], s: Complex<T>| -> Vec<Complex<T>> {
        y.iter().zip(k).map(|(a, b)| *a + *b * s).collect()
    };
    for _ in 0..steps {
        let k1 = linalg::cmatvec(m, &y);
        let k2 = linalg::cmatvec(m, &axpy(&y, &k1, half));
        let k3 = linalg::cmatvec(m, &axpy(&y, &k2, half));
        let k4 = linalg::cmatvec(m, &axpy(&y, &k3, hc));
        for i in 0..y.len() {
            y[i] += (k1[i] + two * k2[i] + two * k3[i] + k4[i]) * sixth;
        }
    }
    let d = rho0.dim();
    DensityMatrix::from_evolved(Operator::from_square(CMatrix::from_vec(d, d, y), rho0.op().basis()))
}

/// Evolves a vectorized operator to each requested time, stepping between
/// sorted times and caching exp(L Δ) per distinct gap Δ.
///
/// On a uniform grid this costs a single matrix exponential.
pub fn evolve_series<T: Real>(
    generator: &Superoperator<T>,
    initial: &Operator<T>,
    times: &[T],
) -> Result<Vec<Operator<T>>> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut cache: HashMap<u64, Superoperator<T>> = HashMap::new();
    let mut out: Vec<Option<Operator<T>>> = vec![None; times.len()];
    let mut current = initial.clone();
    let mut now = T::zero();
    for idx in order {
        let target = times[idx];
        if target < T::zero() {
            return Err(Error::NegativeParameter { name: "time", value: target.as_f64() });
        }
        let gap = target - now;
        if gap > T::zero() {
            let key = gap.as_f64().to_bits();
            if let Entry::Vacant(slot) = cache.entry(key) {
                slot.insert(channel_propagator(generator, gap)?);
            }
            current = cache[&key].apply(&current);
            now = target;
        }
        out[idx] = Some(current.clone());
    }
    Ok(out.into_iter().map(|o| o.expect("every time visited")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qop::{basis_state, bell_state, QubitLevel};

    fn default_params(n_max: usize) -> SystemParams<f64> {
        let two_pi = 2.0 * std::f64::consts::PI;
        SystemParams::new(two_pi * 5.927, two_pi * 5.927, two_pi * 5.59e-3, FockTruncation::new(n_max).unwrap())
            .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn mixed_state(trunc: FockTruncation, salt: f64) -> DensityMatrix<f64> {
        let d = trunc.joint_dim();
        let a = CMatrix::from_fn(d, d, |i, j| {
            let decay = (-0.6 * ((i / 2) + (j / 2)) as f64).exp();
            c((salt + i as f64 * 1.7 + j as f64 * 0.3).sin() * decay, (salt * 2.0 + i as f64 * 0.2 - j as f64).cos() * decay)
        });
        let p = linalg::cmatmul(&a, &a.adjoint());
        let tr = p.trace();
        DensityMatrix::new(Operator::new(p.map(|z| z / tr), Basis::MagnonMajor).unwrap()).unwrap()
    }

    fn default_decoherence() -> DecoherenceParams<f64> {
        DecoherenceParams::from_lifetimes(8000.0, 1000.0, 250.0, 0.0).unwrap()
    }

    #[test]
    fn resonant_single_excitation_block_splits_by_g() {
        let p = default_params(3);
        let h = jc_hamiltonian(&p, Frame::RotatingAtMagnon);
        let block = CMatrix::from_row_slice(
            2,
            2,
            &[h.matrix()[(2, 2)], h.matrix()[(2, 1)], h.matrix()[(1, 2)], h.matrix()[(1, 1)]],
        );
        let ev = linalg::eigvalsh(&block);
        assert!((ev[0] + p.g_mq).abs() < 1e-15);
        assert!((ev[1] - p.g_mq).abs() < 1e-15);
    }

    #[test]
    fn lab_frame_uncoupled_diagonal() {
        let mut p = default_params(3);
        p.g_mq = 1e-300;
        let h = jc_hamiltonian(&p, Frame::Lab);
        assert!((h.matrix()[(1, 1)].re - p.omega_q / 2.0).abs() < 1e-12);
        assert!((h.matrix()[(2, 2)].re - (p.omega_m - p.omega_q / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_is_hermitian_for_many_params() {
        for k in 0..20 {
            let kf = k as f64;
            let p = SystemParams::new(30.0 + kf.sin(), 37.0 + kf, 0.01 + 0.003 * kf, FockTruncation::new(1 + k % 6).unwrap())
                .unwrap();
            for frame in [Frame::Lab, Frame::RotatingAtMagnon] {
                assert!(jc_hamiltonian(&p, frame).hermitian_deviation() < 1e-14);
            }
        }
    }

    #[test]
    fn unitary_propagator_examples() {
        let p = default_params(4);
        let h = jc_hamiltonian(&p, Frame::RotatingAtMagnon);
        let u0 = unitary_propagator(&h, 0.0).unwrap();
        assert!(u0.is_unitary(1e-12));
        assert!(linalg::max_abs_diff(u0.matrix(), &linalg::identity(10)) < 1e-12);
        let u = unitary_propagator(&h, 137.0).unwrap();
        assert!(u.is_unitary(1e-12));

        let ub = unitary_propagator(&h, p.bell_time()).unwrap();
        let start = basis_state::<f64>(p.trunc, 0, QubitLevel::Plus).unwrap();
        let out = linalg::cmatvec(ub.matrix(), start.amplitudes().as_slice());
        let bell = bell_state::<f64>(p.trunc);
        for (x, y) in out.iter().zip(bell.amplitudes().iter()) {
            assert!((x - y).norm() < 1e-12);
        }

        let bad = Operator::new(CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]), Basis::Qubit)
            .unwrap();
        assert!(matches!(unitary_propagator(&bad, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn coherent_liouvillian_matches_commutator_form() {
        let p = default_params(2);
        let h = jc_hamiltonian(&p, Frame::RotatingAtMagnon);
        let l = liouvillian(&h, &DecoherenceParams::none()).unwrap();
        let d = h.dim();
        let id = linalg::identity::<f64>(d);
        let expected = (linalg::kron(&id, h.matrix()) - linalg::kron(&h.matrix().transpose(), &id)).map(|z| z * c(0.0, -1.0));
        assert!(linalg::max_abs_diff(l.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn dephasing_leaves_identity_fixed() {
        let t = FockTruncation::new(2).unwrap();
        let h = Operator::<f64>::zeros(t.joint_dim(), Basis::MagnonMajor);
        let dec = DecoherenceParams::new(0.0, 0.3, 0.0, 0.0).unwrap();
        let l = liouvillian(&h, &dec).unwrap();
        let mixed = DensityMatrix::<f64>::maximally_mixed(t.joint_dim(), Basis::MagnonMajor);
        let out = l.apply(mixed.op());
        assert!(out.matrix().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn trace_functional_is_left_null_vector() {
        for (k, n_th) in [(0usize, 0.0), (1, 0.4), (2, 1.5)] {
            let mut p = default_params(3 + k);
            p.omega_q += 0.3 * k as f64;
            let dec = DecoherenceParams::new(0.001 * (k + 1) as f64, 0.002, 0.004, n_th).unwrap();
            let l = liouvillian(&jc_hamiltonian(&p, Frame::RotatingAtMagnon), &dec).unwrap();
            let worst = l.trace_functional().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(worst < 1e-12, "worst {worst}");
        }
        assert!(matches!(
            DecoherenceParams::new(-1.0, 0.0, 0.0, 0.0),
            Err(Error::NegativeParameter { name: "gamma1_q", .. })
        ));
    }

    #[test]
    fn channel_propagator_matches_unitary_when_noiseless() {
        let p = default_params(3);
        let h = jc_hamiltonian(&p, Frame::RotatingAtMagnon);
        let l = liouvillian(&h, &DecoherenceParams::none()).unwrap();
        let ident = channel_propagator(&l, 0.0).unwrap();
        assert_eq!(ident, Superoperator::identity(8, Basis::MagnonMajor));
        for (salt, t) in [(0.1, 5.0), (1.3, 40.0), (2.2, 180.0)] {
            let rho = mixed_state(p.trunc, salt);
            let phi = channel_propagator(&l, t).unwrap();
            let u = unitary_propagator(&h, t).unwrap();
            let expected = rho.op().conjugate_by(&u);
            assert!(linalg::max_abs_diff(phi.apply(rho.op()).matrix(), expected.matrix()) < 1e-9);
        }
        assert!(matches!(channel_propagator(&l, -1.0), Err(Error::NegativeParameter { .. })));
    }

    #[test]
    fn magnon_decay_is_exponential() {
        let t = FockTruncation::new(3).unwrap();
        let h = Operator::<f64>::zeros(t.joint_dim(), Basis::MagnonMajor);
        let kappa = 1.0 / 250.0;
        let l = liouvillian(&h, &DecoherenceParams::new(0.0, 0.0, kappa, 0.0).unwrap()).unwrap();
        let rho = basis_state::<f64>(t, 1, QubitLevel::Ground).unwrap().to_density();
        for time in [10.0, 100.0, 400.0] {
            let out = channel_propagator(&l, time).unwrap().apply_state(&rho).unwrap();
            assert!((out.diagonal()[2] - (-kappa * time).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_is_cptp() {
        let p = default_params(3);
        let dec = DecoherenceParams::new(1.0 / 8000.0, 0.001, 1.0 / 250.0, 0.2).unwrap();
        let l = liouvillian(&jc_hamiltonian(&p, Frame::RotatingAtMagnon), &dec).unwrap();
        let phi = channel_propagator(&l, 60.0).unwrap();
        assert!(phi.trace_preservation_error() < 1e-9);
        assert!(phi.choi_min_eigenvalue() > -1e-9);
        let out = phi.apply_state(&mixed_state(p.trunc, 0.7)).unwrap();
        assert!((out.op().trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn semigroup_property() {
        let p = default_params(3);
        let l = liouvillian(&jc_hamiltonian(&p, Frame::RotatingAtMagnon), &default_decoherence()).unwrap();
        let (t1, t2) = (37.0, 90.0);
        let lhs = channel_propagator(&l, t1).unwrap().compose(&channel_propagator(&l, t2).unwrap());
        let rhs = channel_propagator(&l, t1 + t2).unwrap();
        assert!(linalg::max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-8);
    }

    #[test]
    fn rk4_agrees_with_exponential() {
        let p = default_params(3);
        let l = liouvillian(&jc_hamiltonian(&p, Frame::RotatingAtMagnon), &default_decoherence()).unwrap();
        let rho = mixed_state(p.trunc, 0.4);
        let a = evolve_rk4(&l, &rho, 60.0, 0.05).unwrap();
        let b = channel_propagator(&l, 60.0).unwrap().apply_state(&rho).unwrap();
        assert!(linalg::max_abs_diff(a.matrix(), b.matrix()) < 1e-6);

        let zero = Superoperator::<f64>::new(CMatrix::zeros(64, 64), 8, Basis::MagnonMajor).unwrap();
        let same = evolve_rk4(&zero, &rho, 10.0, 0.5).unwrap();
        assert_eq!(same.matrix(), rho.matrix());
        assert!(matches!(evolve_rk4(&l, &rho, 1.0, 0.0), Err(Error::NonPositiveStep(_))));
        assert!(matches!(evolve_rk4(&l, &rho, 1.0, 2.0), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn adjoint_duality_and_unitality() {
        let p = default_params(2);
        let dec = DecoherenceParams::new(0.002, 0.001, 0.004, 0.3).unwrap();
        let l = liouvillian(&jc_hamiltonian(&p, Frame::RotatingAtMagnon), &dec).unwrap();
        let phi = channel_propagator(&l, 25.0).unwrap();
        let dual = channel_adjoint(&phi);
        for salt in [0.2, 0.9, 1.7] {
            let rho = mixed_state(p.trunc, salt);
            let a = mixed_state(p.trunc, salt + 5.0).op().scale(c(3.0, 0.0));
            let lhs = qop::trace_product(a.matrix(), phi.apply(rho.op()).matrix());
            let rhs = qop::trace_product(dual.apply(&a).matrix(), rho.matrix());
            assert!((lhs - rhs).norm() < 1e-10);
        }
        let id = Operator::identity(6, Basis::MagnonMajor);
        assert!(linalg::max_abs_diff(dual.apply(&id).matrix(), id.matrix()) < 1e-10);

        let u = unitary_propagator(&jc_hamiltonian(&p, Frame::RotatingAtMagnon), 11.0).unwrap();
        let conj = channel_adjoint(&Superoperator::from_unitary(&u));
        let expected = Superoperator::from_unitary(&u.adjoint());
        assert!(linalg::max_abs_diff(conj.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn evolve_series_matches_direct_exponentials() {
        let p = default_params(2);
        let l = liouvillian(&jc_hamiltonian(&p, Frame::RotatingAtMagnon), &default_decoherence()).unwrap();
        let rho = mixed_state(p.trunc, 0.5);
        let times = [9.0, 0.0, 3.0, 6.0, 7.5];
        let series = evolve_series(&l, rho.op(), &times).unwrap();
        for (t, got) in times.iter().zip(series.iter()) {
            let direct = channel_propagator(&l, *t).unwrap().apply(rho.op());
            assert!(linalg::max_abs_diff(got.matrix(), direct.matrix()) < 1e-12);
        }
    }

    #[test]
    fn resonant_swap_is_cos_squared() {
        let p = default_params(3);
        let h = jc_hamiltonian(&p, Frame::RotatingAtMagnon);
        let start = basis_state::<f64>(p.trunc, 0, QubitLevel::Plus).unwrap().to_density();
        let proj = qop::on_qubit(p.trunc, &qop::qubit_op(QubitOpKind::ProjectorPlus));
        for k in 0..61 {
            let tau = 3.0 * k as f64;
            let u = unitary_propagator(&h, tau).unwrap();
            let p_plus = start.op().conjugate_by(&u);
            let value = qop::trace_product(proj.matrix(), p_plus.matrix()).re;
            assert!((value - (p.g_mq * tau).cos().powi(2)).abs() < 1e-9);
        }
    }
}
