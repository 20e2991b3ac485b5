// SPDX-License-Identifier: Apache-2.0

//! Operator algebra on the truncated magnon ⊗ qubit space.
//!
//! Joint states use magnon-major ordering: the basis vector |n, q⟩ sits at
//! index `2n + q` with `q = 0` for |g⟩ and `q = 1` for |+⟩, so operators
//! are built as `magnon ⊗ qubit`.

use std::ops::{Add, Mul, Sub};

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::scalar::Real;

/// Highest retained Fock level of the magnon mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockTruncation {
    n_max: usize,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::TruncationTooSmall(n_max));
        }
        Ok(Self { n_max })
    }

    /// Recovers the truncation from a joint-space dimension `2(n_max + 1)`.
    pub fn from_joint_dim(dim: usize) -> Result<Self> {
        if !dim.is_multiple_of(2) || dim < 4 {
            return Err(Error::DimensionMismatch {
                expected: 2 * (dim / 2).max(2),
                found: dim,
            });
        }
        Self::new(dim / 2 - 1)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn mode_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn joint_dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Joint index of |n, q⟩.
    pub fn index(&self, n: usize, q: QubitLevel) -> Result<usize> {
        if n > self.n_max {
            return Err(Error::FockIndexOutOfRange { index: n, n_max: self.n_max });
        }
        Ok(2 * n + q as usize)
    }
}

impl Default for FockTruncation {
    fn default() -> Self {
        Self { n_max: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitLevel {
    Ground = 0,
    Plus = 1,
}

/// Basis tag carried by every operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Qubit alone, ordered (|g⟩, |+⟩).
    Qubit,
    /// Magnon Fock states |0⟩..|n_max⟩.
    Magnon,
    /// Joint space, index `2n + q`.
    MagnonMajor,
    /// Anything else (test fixtures, products of unrelated spaces).
    Generic,
}

impl Basis {
    pub fn tag(&self) -> &'static str {
        match self {
            Basis::Qubit => "qubit",
            Basis::Magnon => "magnon",
            Basis::MagnonMajor => "magnon-major",
            Basis::Generic => "generic",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "qubit" => Some(Basis::Qubit),
            "magnon" => Some(Basis::Magnon),
            "magnon-major" => Some(Basis::MagnonMajor),
            "generic" => Some(Basis::Generic),
            _ => None,
        }
    }
}

/// Dense square complex matrix with its basis convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T: Real> {
    matrix: CMatrix<T>,
    basis: Basis,
}

impl<T: Real> Operator<T> {
    pub fn new(matrix: CMatrix<T>, basis: Basis) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self { matrix, basis })
    }

    pub(crate) fn from_square(matrix: CMatrix<T>, basis: Basis) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix, basis }
    }

    pub fn identity(dim: usize, basis: Basis) -> Self {
        Self::from_square(CMatrix::identity(dim, dim), basis)
    }

    pub fn zeros(dim: usize, basis: Basis) -> Self {
        Self::from_square(CMatrix::zeros(dim, dim), basis)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::from_square(self.matrix.adjoint(), self.basis)
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self::from_square(self.matrix.map(|z| z * factor), self.basis)
    }

    pub fn trace(&self) -> Complex<T> {
        self.matrix.trace()
    }

    /// Largest |A_ij − conj(A_ji)|.
    pub fn hermitian_deviation(&self) -> T {
        linalg::max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        let prod = linalg::cmatmul(&self.matrix, &self.matrix.adjoint());
        linalg::max_abs_diff(&prod, &CMatrix::identity(self.dim(), self.dim())) <= tol
    }

    /// `U X U†`.
    pub fn conjugate_by(&self, u: &Operator<T>) -> Self {
        let left = linalg::cmatmul(&u.matrix, &self.matrix);
        Self::from_square(linalg::cmatmul(&left, &u.matrix.adjoint()), self.basis)
    }

    /// `U† X U`.
    pub fn conjugate_by_adjoint(&self, u: &Operator<T>) -> Self {
        let left = linalg::cmatmul(&u.matrix.adjoint(), &self.matrix);
        Self::from_square(linalg::cmatmul(&left, &u.matrix), self.basis)
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues_hermitian(&self) -> Vec<T> {
        linalg::eigvalsh(&linalg::hermitian_part(&self.matrix))
    }

    pub fn commutator(&self, other: &Operator<T>) -> Self {
        &(self * other) - &(other * self)
    }
}

impl<T: Real> Mul for &Operator<T> {
    type Output = Operator<T>;
    fn mul(self, rhs: &Operator<T>) -> Operator<T> {
        Operator::from_square(linalg::cmatmul(&self.matrix, &rhs.matrix), self.basis)
    }
}

impl<T: Real> Add for &Operator<T> {
    type Output = Operator<T>;
    fn add(self, rhs: &Operator<T>) -> Operator<T> {
        Operator::from_square(&self.matrix + &rhs.matrix, self.basis)
    }
}

impl<T: Real> Sub for &Operator<T> {
    type Output = Operator<T>;
    fn sub(self, rhs: &Operator<T>) -> Operator<T> {
        Operator::from_square(&self.matrix - &rhs.matrix, self.basis)
    }
}

fn cr<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Magnon lowering operator: ⟨n−1|a|n⟩ = √n.
pub fn annihilation<T: Real>(trunc: FockTruncation) -> Operator<T> {
    let d = trunc.mode_dim();
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = cr(T::lit(n as f64).sqrt());
    }
    Operator::from_square(m, Basis::Magnon)
}

pub fn creation<T: Real>(trunc: FockTruncation) -> Operator<T> {
    annihilation(trunc).adjoint()
}

/// a†a, exactly diagonal.
pub fn number<T: Real>(trunc: FockTruncation) -> Operator<T> {
    let d = trunc.mode_dim();
    let diag = CVector::from_iterator(d, (0..d).map(|n| cr(T::lit(n as f64))));
    Operator::from_square(CMatrix::from_diagonal(&diag), Basis::Magnon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitOpKind {
    SigmaZ,
    SigmaPlus,
    SigmaMinus,
    SigmaX,
    SigmaY,
    ProjectorG,
    ProjectorPlus,
}

/// Qubit operator in the (|g⟩, |+⟩) basis, with σ_z = |+⟩⟨+| − |g⟩⟨g|.
pub fn qubit_op<T: Real>(kind: QubitOpKind) -> Operator<T> {
    let z = Complex::new(T::zero(), T::zero());
    let one = cr(T::one());
    let i = Complex::new(T::zero(), T::one());
    let entries = match kind {
        QubitOpKind::SigmaZ => [-one, z, z, one],
        QubitOpKind::SigmaPlus => [z, z, one, z],
        QubitOpKind::SigmaMinus => [z, one, z, z],
        QubitOpKind::SigmaX => [z, one, one, z],
        // −i σ+ + i σ−
        QubitOpKind::SigmaY => [z, i, -i, z],
        QubitOpKind::ProjectorG => [one, z, z, z],
        QubitOpKind::ProjectorPlus => [z, z, z, one],
    };
    Operator::from_square(CMatrix::from_row_slice(2, 2, &entries), Basis::Qubit)
}

/// Kronecker product `a ⊗ b`; a magnon operator times a qubit operator lands
/// in the magnon-major joint basis.
pub fn tensor<T: Real>(a: &Operator<T>, b: &Operator<T>) -> Operator<T> {
    let basis = match (a.basis, b.basis) {
        (Basis::Magnon, Basis::Qubit) => Basis::MagnonMajor,
        _ => Basis::Generic,
    };
    Operator::from_square(linalg::kron(&a.matrix, &b.matrix), basis)
}

/// Lifts a magnon operator to the joint space.
pub fn on_magnon<T: Real>(op: &Operator<T>) -> Operator<T> {
    tensor(op, &Operator::identity(2, Basis::Qubit))
}

/// Lifts a qubit operator to the joint space.
pub fn on_qubit<T: Real>(trunc: FockTruncation, op: &Operator<T>) -> Operator<T> {
    tensor(&Operator::identity(trunc.mode_dim(), Basis::Magnon), op)
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    op: Operator<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates the state invariants; the stored matrix is the exact input.
    pub fn new(op: Operator<T>) -> Result<Self> {
        check_state(&op)?;
        Ok(Self { op })
    }

    /// Symmetrizes away round-off asymmetry before validating.
    pub fn from_evolved(op: Operator<T>) -> Result<Self> {
        let basis = op.basis;
        Self::new(Operator::from_square(linalg::hermitian_part(&op.matrix), basis))
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        let v = &psi.amplitudes;
        let m = v * v.adjoint();
        Self { op: Operator::from_square(m, psi.basis) }
    }

    pub fn maximally_mixed(dim: usize, basis: Basis) -> Self {
        let w = cr(T::one() / T::lit(dim as f64));
        Self { op: Operator::identity(dim, basis).scale(w) }
    }

    /// Nearest valid state in Frobenius norm.
    pub fn project(m: &CMatrix<T>, basis: Basis) -> Self {
        Self { op: Operator::from_square(linalg::project_density(m), basis) }
    }

    pub fn validate(&self) -> Result<()> {
        check_state(&self.op)
    }

    pub fn op(&self) -> &Operator<T> {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.op.matrix
    }

    pub fn into_op(self) -> Operator<T> {
        self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Re Tr[M ρ].
    pub fn expectation(&self, m: &Operator<T>) -> T {
        trace_product(&m.matrix, &self.op.matrix).re
    }

    /// Tr(ρ²).
    pub fn purity(&self) -> T {
        trace_product(&self.op.matrix, &self.op.matrix).re
    }

    pub fn min_eigenvalue(&self) -> T {
        self.op.eigenvalues_hermitian()[0]
    }

    /// Reduced qubit state, tracing out the magnon.
    pub fn partial_trace_magnon(&self, trunc: FockTruncation) -> Result<DensityMatrix<T>> {
        if self.dim() != trunc.joint_dim() {
            return Err(Error::DimensionMismatch { expected: trunc.joint_dim(), found: self.dim() });
        }
        let m = &self.op.matrix;
        let mut red = CMatrix::zeros(2, 2);
        for n in 0..trunc.mode_dim() {
            for a in 0..2 {
                for b in 0..2 {
                    red[(a, b)] += m[(2 * n + a, 2 * n + b)];
                }
            }
        }
        Ok(Self { op: Operator::from_square(red, Basis::Qubit) })
    }

    /// Populations ⟨k|ρ|k⟩.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|k| self.op.matrix[(k, k)].re).collect()
    }
}

/// Tr[A B] without forming the product.
pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn check_state<T: Real>(op: &Operator<T>) -> Result<()> {
    let dev = op.hermitian_deviation();
    if dev > T::hermitian_tol() {
        return Err(Error::NotHermitian(dev.as_f64()));
    }
    let tr = op.trace();
    if (tr - cr(T::one())).modulus() > T::trace_tol() {
        return Err(Error::BadTrace(tr.re.as_f64()));
    }
    let min = op.eigenvalues_hermitian()[0];
    if min < T::eigenvalue_floor() {
        return Err(Error::NotPositive(min.as_f64()));
    }
    Ok(())
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: CVector<T>,
    basis: Basis,
}

impl<T: Real> PureState<T> {
    pub fn new(amplitudes: CVector<T>, basis: Basis) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - T::one()).abs() > T::norm_tol() {
            return Err(Error::NotNormalized(norm.as_f64()));
        }
        Ok(Self { amplitudes, basis })
    }

    /// Rescales any nonzero vector to unit norm.
    pub fn normalized(amplitudes: CVector<T>, basis: Basis) -> Self {
        let norm = amplitudes.norm();
        Self { amplitudes: amplitudes.map(|z| z / norm), basis }
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_pure(self)
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn overlap_with(&self, rho: &DensityMatrix<T>) -> T {
        let v = &self.amplitudes;
        let rv = linalg::cmatvec(rho.matrix(), v.as_slice());
        v.iter().zip(rv.iter()).fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re)
    }
}

/// |n, q⟩ on the joint space.
pub fn basis_state<T: Real>(trunc: FockTruncation, n: usize, q: QubitLevel) -> Result<PureState<T>> {
    let idx = trunc.index(n, q)?;
    let mut v = CVector::zeros(trunc.joint_dim());
    v[idx] = cr(T::one());
    Ok(PureState { amplitudes: v, basis: Basis::MagnonMajor })
}

/// (|0,+⟩ − i|1,g⟩)/√2.
pub fn bell_state<T: Real>(trunc: FockTruncation) -> PureState<T> {
    let mut v = CVector::zeros(trunc.joint_dim());
    let s = T::one() / T::lit(2.0).sqrt();
    let zero_plus = trunc.index(0, QubitLevel::Plus).expect("n = 0 is always retained");
    let one_ground = trunc.index(1, QubitLevel::Ground).expect("n_max is at least 1");
    v[zero_plus] = cr(s);
    v[one_ground] = Complex::new(T::zero(), -s);
    PureState { amplitudes: v, basis: Basis::MagnonMajor }
}
