// SPDX-License-Identifier: Apache-2.0

//! Pulse-level protocols: qubit rotations, magnon displacements, resonant
//! swaps, and the experiments built from them.
//!
//! Rotations and displacements are instantaneous. Swaps and idles carry a
//! duration and, with noise enabled, evolve under the Lindblad generator.
//! Each pulse acts in its own resonant frame, so no free phase accumulates
//! between pulses unless an explicit [`PulseOp::Idle`] is inserted.

use nalgebra::{ComplexField, Matrix3, Vector3};
use num_complex::Complex;

use crate::dynamics::{
    self, channel_propagator, jc_hamiltonian, liouvillian, DecoherenceParams, Frame, Superoperator,
    SystemParams,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::qop::{self, Basis, DensityMatrix, FockTruncation, Operator, QubitLevel, QubitOpKind};
use crate::scalar::Real;

/// Autler-Townes drive on the e-f transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ATDrive<T: Real> {
    pub omega_ge: T,
    pub rabi: T,
}

impl<T: Real> ATDrive<T> {
    pub fn new(omega_ge: T, rabi: T) -> Result<Self> {
        if rabi < T::zero() {
            return Err(Error::NegativeParameter { name: "rabi", value: rabi.as_f64() });
        }
        Ok(Self { omega_ge, rabi })
    }

    /// Drive strength that places the upper dressed level at `omega_q`.
    pub fn for_qubit_frequency(omega_ge: T, omega_q: T) -> Result<Self> {
        Self::new(omega_ge, T::lit(2.0) * (omega_q - omega_ge))
    }
}

/// ω₊ = ω_ge + Ω_d/2, the dressed transition used as the qubit.
pub fn at_qubit_frequency<T: Real>(d: &ATDrive<T>) -> T {
    d.omega_ge + d.rabi / T::lit(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseOp<T: Real> {
    QubitRotation { axis: [T; 3], angle: T },
    Displacement { alpha: Complex<T> },
    Swap { tau: T },
    Idle { tau: T, detuning: T },
}

impl<T: Real> PulseOp<T> {
    pub fn rx(angle: T) -> Self {
        PulseOp::QubitRotation { axis: [T::one(), T::zero(), T::zero()], angle }
    }

    pub fn ry(angle: T) -> Self {
        PulseOp::QubitRotation { axis: [T::zero(), T::one(), T::zero()], angle }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence<T: Real> {
    pub ops: Vec<PulseOp<T>>,
    pub noise_on: bool,
}

/// Classical readout confusion applied to the excited-state probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutError<T: Real> {
    /// P(read + | state g).
    pub plus_given_g: T,
    /// P(read g | state +).
    pub g_given_plus: T,
}

impl<T: Real> ReadoutError<T> {
    pub fn none() -> Self {
        Self { plus_given_g: T::zero(), g_given_plus: T::zero() }
    }

    pub fn new(plus_given_g: T, g_given_plus: T) -> Result<Self> {
        for (name, v) in [("plus_given_g", plus_given_g), ("g_given_plus", g_given_plus)] {
            if v < T::zero() || v > T::one() {
                return Err(Error::InvalidParameter { name, reason: "must lie in [0, 1]".into() });
            }
        }
        Ok(Self { plus_given_g, g_given_plus })
    }

    pub fn apply(&self, p_plus: T) -> T {
        p_plus * (T::one() - self.g_given_plus) + (T::one() - p_plus) * self.plus_given_g
    }

    pub fn is_ideal(&self) -> bool {
        self.plus_given_g == T::zero() && self.g_given_plus == T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions<T: Real> {
    /// Bell-preparation swap time; `None` uses π/(4g).
    pub bell_swap_time: Option<T>,
    /// Duration charged to each rotation or displacement (decay only).
    pub pulse_duration: T,
    pub readout: ReadoutError<T>,
}

impl<T: Real> Default for SimOptions<T> {
    fn default() -> Self {
        Self { bell_swap_time: None, pulse_duration: T::zero(), readout: ReadoutError::none() }
    }
}

/// exp(−i θ n·σ/2) on the qubit.
pub fn rotation_unitary<T: Real>(axis: [T; 3], angle: T) -> Result<Operator<T>> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if (norm - T::one()).abs() > T::norm_tol() {
        return Err(Error::NonUnitAxis(norm.as_f64()));
    }
    let half = angle / T::lit(2.0);
    let sx = qop::qubit_op::<T>(QubitOpKind::SigmaX);
    let sy = qop::qubit_op::<T>(QubitOpKind::SigmaY);
    let sz = qop::qubit_op::<T>(QubitOpKind::SigmaZ);
    let r = |x: T| Complex::new(x, T::zero());
    let n_sigma = &(&sx.scale(r(axis[0])) + &sy.scale(r(axis[1]))) + &sz.scale(r(axis[2]));
    let cos = Operator::identity(2, Basis::Qubit).scale(r(half.cos()));
    Ok(&cos + &n_sigma.scale(Complex::new(T::zero(), -half.sin())))
}

/// Weight of a coherent state |α⟩ above Fock level `n_max`.
pub fn coherent_tail_weight(alpha_abs: f64, n_max: usize) -> f64 {
    let x = alpha_abs * alpha_abs;
    if x == 0.0 {
        return 0.0;
    }
    // e^{-x} x^n / n! for n = n_max + 1, then the series upward.
    let n0 = n_max + 1;
    let mut log_term = -x + n0 as f64 * x.ln();
    for k in 1..=n0 {
        log_term -= (k as f64).ln();
    }
    let mut term = log_term.exp();
    let mut sum = 0.0;
    let mut n = n0;
    while term > 1e-300 && (term > sum * 1e-17 || n < n0 + 5) {
        sum += term;
        n += 1;
        term *= x / n as f64;
    }
    sum
}

pub const DISPLACEMENT_TAIL_LIMIT: f64 = 1e-6;

/// Truncated displacement exp(α a† − α* a) on the magnon space.
pub fn displacement_operator<T: Real>(trunc: FockTruncation, alpha: Complex<T>) -> Result<Operator<T>> {
    let tail = coherent_tail_weight(alpha.modulus().as_f64(), trunc.n_max());
    if tail >= DISPLACEMENT_TAIL_LIMIT {
        return Err(Error::TruncationTail { alpha_abs: alpha.modulus().as_f64(), tail, n_max: trunc.n_max() });
    }
    let a = qop::annihilation::<T>(trunc);
    let ad = a.adjoint();
    let generator = &ad.scale(alpha) - &a.scale(alpha.conj());
    // exp(G) = exp(−iK) with K = iG Hermitian.
    let k = generator.scale(Complex::new(T::zero(), T::one()));
    dynamics::unitary_propagator(&k, T::one())
}

/// Qubit reduced state from the three readout probabilities after the
/// rotations I, R_x(π/2), R_y(π/2). Linear inversion; no positivity
/// enforcement, so readout errors can push the result outside the Bloch ball.
pub fn qubit_state_from_rotations<T: Real>(p_plus: [T; 3]) -> Result<Operator<T>> {
    let rotations = [
        rotation_unitary([T::one(), T::zero(), T::zero()], T::zero())?,
        rotation_unitary([T::one(), T::zero(), T::zero()], T::frac_pi_2())?,
        rotation_unitary([T::zero(), T::one(), T::zero()], T::frac_pi_2())?,
    ];
    let sigmas = [
        qop::qubit_op::<T>(QubitOpKind::SigmaX),
        qop::qubit_op::<T>(QubitOpKind::SigmaY),
        qop::qubit_op::<T>(QubitOpKind::SigmaZ),
    ];
    let proj = qop::qubit_op::<T>(QubitOpKind::ProjectorPlus);
    // Effect R†Π₊R = (I + m·σ)/2 with m_k = Tr[R†Π₊R σ_k]; then 2p − 1 = m·s.
    let mut m = Matrix3::<T>::zeros();
    let mut rhs = Vector3::<T>::zeros();
    for (row, r) in rotations.iter().enumerate() {
        let effect = proj.conjugate_by_adjoint(r);
        for (col, s) in sigmas.iter().enumerate() {
            m[(row, col)] = qop::trace_product(effect.matrix(), s.matrix()).re;
        }
        rhs[row] = T::lit(2.0) * p_plus[row] - T::one();
    }
    let bloch = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidParameter { name: "rotations", reason: "not informationally complete".into() })?;
    let half = Complex::new(T::lit(0.5), T::zero());
    let mut rho = Operator::identity(2, Basis::Qubit).scale(half);
    for (k, s) in sigmas.iter().enumerate() {
        rho = &rho + &s.scale(Complex::new(bloch[k] / T::lit(2.0), T::zero()));
    }
    Ok(rho)
}

/// Executes pulse sequences and the standard experiments for one device.
#[derive(Debug, Clone)]
pub struct Simulator<T: Real> {
    system: SystemParams<T>,
    decoherence: DecoherenceParams<T>,
    options: SimOptions<T>,
    swap_hamiltonian: Operator<T>,
    swap_eigen: (Vec<T>, CMatrix<T>),
    swap_generator: Superoperator<T>,
    pulse_decay: Option<Superoperator<T>>,
    readout_projector: Operator<T>,
}

impl<T: Real> Simulator<T> {
    pub fn new(system: SystemParams<T>, decoherence: DecoherenceParams<T>, options: SimOptions<T>) -> Result<Self> {
        let resonant = system.with_qubit_frequency(system.omega_m);
        let swap_hamiltonian = jc_hamiltonian(&resonant, Frame::RotatingAtMagnon);
        let swap_eigen = linalg::eigh(swap_hamiltonian.matrix());
        let swap_generator = liouvillian(&swap_hamiltonian, &decoherence)?;
        if options.pulse_duration < T::zero() {
            return Err(Error::NegativeParameter { name: "pulse_duration", value: options.pulse_duration.as_f64() });
        }
        let pulse_decay = if options.pulse_duration > T::zero() && !decoherence.is_noiseless() {
            let zero = Operator::zeros(system.trunc.joint_dim(), Basis::MagnonMajor);
            Some(channel_propagator(&liouvillian(&zero, &decoherence)?, options.pulse_duration)?)
        } else {
            None
        };
        let readout_projector = qop::on_qubit(system.trunc, &qop::qubit_op(QubitOpKind::ProjectorPlus));
        Ok(Self {
            system,
            decoherence,
            options,
            swap_hamiltonian,
            swap_eigen,
            swap_generator,
            pulse_decay,
            readout_projector,
        })
    }

    pub fn system(&self) -> &SystemParams<T> {
        &self.system
    }

    pub fn decoherence(&self) -> &DecoherenceParams<T> {
        &self.decoherence
    }

    pub fn options(&self) -> &SimOptions<T> {
        &self.options
    }

    pub fn trunc(&self) -> FockTruncation {
        self.system.trunc
    }

    /// Resonant swap Hamiltonian g(σ₊a + σ₋a†).
    pub fn swap_hamiltonian(&self) -> &Operator<T> {
        &self.swap_hamiltonian
    }

    /// Lindblad generator of the resonant swap.
    pub fn swap_generator(&self) -> &Superoperator<T> {
        &self.swap_generator
    }

    pub fn bell_swap_time(&self) -> T {
        self.options.bell_swap_time.unwrap_or_else(|| self.system.bell_time())
    }

    pub fn ground_state(&self) -> DensityMatrix<T> {
        qop::basis_state(self.trunc(), 0, QubitLevel::Ground).expect("n = 0 is always retained").to_density()
    }

    fn after_pulse(&self, rho: DensityMatrix<T>, noise_on: bool) -> Result<DensityMatrix<T>> {
        match (&self.pulse_decay, noise_on) {
            (Some(decay), true) => decay.apply_state(&rho),
            _ => Ok(rho),
        }
    }

    pub fn apply_rotation(&self, rho: &DensityMatrix<T>, axis: [T; 3], angle: T) -> Result<DensityMatrix<T>> {
        self.rotate(rho, axis, angle, false)
    }

    fn rotate(&self, rho: &DensityMatrix<T>, axis: [T; 3], angle: T, noise_on: bool) -> Result<DensityMatrix<T>> {
        let u = qop::on_qubit(self.trunc(), &rotation_unitary(axis, angle)?);
        let out = DensityMatrix::from_evolved(rho.op().conjugate_by(&u))?;
        self.after_pulse(out, noise_on)
    }

    pub fn apply_displacement(&self, rho: &DensityMatrix<T>, alpha: Complex<T>) -> Result<DensityMatrix<T>> {
        self.displace(rho, alpha, false)
    }

    fn displace(&self, rho: &DensityMatrix<T>, alpha: Complex<T>, noise_on: bool) -> Result<DensityMatrix<T>> {
        let d = qop::on_magnon(&displacement_operator(self.trunc(), alpha)?);
        let out = DensityMatrix::from_evolved(rho.op().conjugate_by(&d))?;
        self.after_pulse(out, noise_on)
    }

    /// Noiseless resonant swap unitary for duration `tau`.
    pub fn swap_unitary(&self, tau: T) -> Operator<T> {
        let (values, vectors) = &self.swap_eigen;
        let u = linalg::hermitian_function(values, vectors, |lam| {
            let ph = -lam * tau;
            Complex::new(ph.cos(), ph.sin())
        });
        Operator::from_square(u, Basis::MagnonMajor)
    }

    pub fn apply_swap(&self, rho: &DensityMatrix<T>, tau: T, noise_on: bool) -> Result<DensityMatrix<T>> {
        if tau < T::zero() {
            return Err(Error::NegativeParameter { name: "tau", value: tau.as_f64() });
        }
        if noise_on && !self.decoherence.is_noiseless() {
            channel_propagator(&self.swap_generator, tau)?.apply_state(rho)
        } else {
            DensityMatrix::from_evolved(rho.op().conjugate_by(&self.swap_unitary(tau)))
        }
    }

    /// States after swapping for each duration; the noisy branch steps
    /// through sorted durations reusing one exponential per distinct gap.
    pub fn swap_series(&self, rho: &DensityMatrix<T>, taus: &[T], noise_on: bool) -> Result<Vec<DensityMatrix<T>>> {
        if let Some(bad) = taus.iter().find(|t| **t < T::zero()) {
            return Err(Error::NegativeParameter { name: "tau", value: bad.as_f64() });
        }
        if noise_on && !self.decoherence.is_noiseless() {
            dynamics::evolve_series(&self.swap_generator, rho.op(), taus)?
                .into_iter()
                .map(DensityMatrix::from_evolved)
                .collect()
        } else {
            taus.iter().map(|&t| self.apply_swap(rho, t, false)).collect()
        }
    }

    pub fn apply_idle(&self, rho: &DensityMatrix<T>, tau: T, detuning: T, noise_on: bool) -> Result<DensityMatrix<T>> {
        if tau < T::zero() {
            return Err(Error::NegativeParameter { name: "tau", value: tau.as_f64() });
        }
        let p = self.system.with_qubit_frequency(self.system.omega_m + detuning);
        let h = jc_hamiltonian(&p, Frame::RotatingAtMagnon);
        if noise_on && !self.decoherence.is_noiseless() {
            channel_propagator(&liouvillian(&h, &self.decoherence)?, tau)?.apply_state(rho)
        } else {
            DensityMatrix::from_evolved(rho.op().conjugate_by(&dynamics::unitary_propagator(&h, tau)?))
        }
    }

    pub fn run(&self, seq: &PulseSequence<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        let mut state = rho.clone();
        for op in &seq.ops {
            state = match *op {
                PulseOp::QubitRotation { axis, angle } => self.rotate(&state, axis, angle, seq.noise_on)?,
                PulseOp::Displacement { alpha } => self.displace(&state, alpha, seq.noise_on)?,
                PulseOp::Swap { tau } => self.apply_swap(&state, tau, seq.noise_on)?,
                PulseOp::Idle { tau, detuning } => self.apply_idle(&state, tau, detuning, seq.noise_on)?,
            };
        }
        Ok(state)
    }

    /// Excited-state readout probability, including any readout error.
    pub fn p_plus(&self, rho: &DensityMatrix<T>) -> T {
        let p = rho.expectation(&self.readout_projector);
        self.options.readout.apply(p.max(T::zero()).min(T::one()))
    }

    /// |0,g⟩ → R_x(π) → swap for the Bell time.
    pub fn generate_bell(&self, noise_on: bool) -> Result<DensityMatrix<T>> {
        let seq = PulseSequence {
            ops: vec![PulseOp::rx(T::pi()), PulseOp::Swap { tau: self.bell_swap_time() }],
            noise_on,
        };
        self.run(&seq, &self.ground_state())
    }

    fn excited_after_pi(&self, noise_on: bool) -> Result<DensityMatrix<T>> {
        let seq = PulseSequence { ops: vec![PulseOp::rx(T::pi())], noise_on };
        self.run(&seq, &self.ground_state())
    }

    /// (τ, P₊) after preparing |0,+⟩ and swapping for τ.
    pub fn swap_oscillation_curve(&self, taus: &[T], noise_on: bool) -> Result<Vec<(T, T)>> {
        let start = self.excited_after_pi(noise_on)?;
        let states = self.swap_series(&start, taus, noise_on)?;
        Ok(taus.iter().zip(states.iter()).map(|(&t, s)| (t, self.p_plus(s))).collect())
    }

    /// Single-excitation eigenvalues of the rotating-frame Hamiltonian at each
    /// qubit frequency, ascending.
    pub fn avoided_crossing(&self, omega_q_sweep: &[T]) -> Vec<(T, [T; 2])> {
        let trunc = FockTruncation::new(1).expect("n_max = 1 is valid");
        let one_g = trunc.index(1, QubitLevel::Ground).expect("in range");
        let zero_p = trunc.index(0, QubitLevel::Plus).expect("in range");
        omega_q_sweep
            .iter()
            .map(|&wq| {
                let p = SystemParams { omega_q: wq, trunc, ..self.system };
                let h = jc_hamiltonian(&p, Frame::RotatingAtMagnon);
                let m = h.matrix();
                let block = CMatrix::from_row_slice(
                    2,
                    2,
                    &[m[(one_g, one_g)], m[(one_g, zero_p)], m[(zero_p, one_g)], m[(zero_p, zero_p)]],
                );
                let ev = linalg::eigvalsh(&block);
                (wq, [ev[0], ev[1]])
            })
            .collect()
    }

    /// Readout probabilities after the rotations I, R_x(π/2), R_y(π/2).
    pub fn qubit_tomography_probabilities(&self, rho: &DensityMatrix<T>) -> Result<[T; 3]> {
        let x = [T::one(), T::zero(), T::zero()];
        let y = [T::zero(), T::one(), T::zero()];
        Ok([
            self.p_plus(rho),
            self.p_plus(&self.apply_rotation(rho, x, T::frac_pi_2())?),
            self.p_plus(&self.apply_rotation(rho, y, T::frac_pi_2())?),
        ])
    }

    /// (τ, Tr ρ_q²) with ρ_q rebuilt from three-rotation qubit tomography.
    pub fn purity_experiment(&self, taus: &[T], noise_on: bool) -> Result<Vec<(T, T)>> {
        let start = self.excited_after_pi(noise_on)?;
        let states = self.swap_series(&start, taus, noise_on)?;
        taus.iter()
            .zip(states.iter())
            .map(|(&t, s)| {
                let probs = self.qubit_tomography_probabilities(s)?;
                let rho_q = qubit_state_from_rotations(probs)?;
                Ok((t, qop::trace_product(rho_q.matrix(), rho_q.matrix()).re))
            })
            .collect()
    }
}
