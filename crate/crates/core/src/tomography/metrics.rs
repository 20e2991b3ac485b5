// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::qop::{DensityMatrix, PureState};
use crate::scalar::Real;

/// √⟨ψ|ρ|ψ⟩ (square-root convention).
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, target: &PureState<T>) -> Result<T> {
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), found: rho.dim() });
    }
    Ok(target.overlap_with(rho).max(T::zero()).sqrt())
}

/// Root fidelity Tr√(√ρ σ √ρ) between mixed states; reduces to
/// [`fidelity`] when σ is pure.
pub fn state_fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: rho.dim() });
    }
    let root = linalg::sqrtm_psd(rho.matrix());
    let inner = linalg::cmatmul(&linalg::cmatmul(&root, sigma.matrix()), &root);
    let values = linalg::eigvalsh(&linalg::hermitian_part(&inner));
    Ok(values.into_iter().filter(|v| *v > T::zero()).fold(T::zero(), |acc, v| acc + v.sqrt()))
}

/// Tr(ρ²).
pub fn purity<T: Real>(rho: &DensityMatrix<T>) -> T {
    rho.purity()
}

/// Leading block holding Fock levels 0..=n_show (both qubit levels each).
pub fn display_block<T: Real>(rho: &DensityMatrix<T>, n_show: usize) -> CMatrix<T> {
    let k = (2 * (n_show + 1)).min(rho.dim());
    rho.matrix().view((0, 0), (k, k)).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qop::{basis_state, bell_state, Basis, FockTruncation, Operator, QubitLevel};
    use num_complex::Complex;

    #[test]
    fn fidelity_examples() {
        let t = FockTruncation::new(1).unwrap();
        let psi = bell_state::<f64>(t);
        assert!((fidelity(&psi.to_density(), &psi).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::<f64>::maximally_mixed(4, Basis::MagnonMajor);
        assert!((fidelity(&mixed, &psi).unwrap() - 0.5).abs() < 1e-15);
        // (|0,+⟩ + i|1,g⟩)/√2 is orthogonal to the target.
        let mut v = psi.amplitudes().clone();
        v[2] = -v[2];
        let orth = PureState::new(v, Basis::MagnonMajor).unwrap().to_density();
        assert!(fidelity(&orth, &psi).unwrap() < 1e-8);
        let other = FockTruncation::new(2).unwrap();
        assert!(fidelity(&basis_state::<f64>(other, 0, QubitLevel::Plus).unwrap().to_density(), &psi).is_err());
    }

    #[test]
    fn state_fidelity_reduces_to_pure_overlap() {
        let t = FockTruncation::new(2).unwrap();
        let psi = bell_state::<f64>(t);
        let rho = DensityMatrix::new(
            Operator::new(
                psi.to_density().matrix().map(|z| z * 0.7)
                    + DensityMatrix::<f64>::maximally_mixed(6, Basis::MagnonMajor).matrix().map(|z| z * 0.3),
                Basis::MagnonMajor,
            )
            .unwrap(),
        )
        .unwrap();
        let a = state_fidelity(&rho, &psi.to_density()).unwrap();
        let b = fidelity(&rho, &psi).unwrap();
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn purity_examples() {
        let t = FockTruncation::new(1).unwrap();
        assert!((purity(&bell_state::<f64>(t).to_density()) - 1.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::<f64>::maximally_mixed(2, Basis::Qubit)) - 0.5).abs() < 1e-15);
        // Bloch-form oracle: Tr ρ² = (1 + r²)/2.
        for k in 0..25 {
            let th = 0.37 * k as f64;
            let ph = 1.1 * k as f64;
            let r = (k as f64 / 25.0).sqrt();
            let (x, y, z) = (r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos());
            let m = CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex::new((1.0 - z) / 2.0, 0.0),
                    Complex::new(x / 2.0, y / 2.0),
                    Complex::new(x / 2.0, -y / 2.0),
                    Complex::new((1.0 + z) / 2.0, 0.0),
                ],
            );
            let rho = DensityMatrix::new(Operator::new(m, Basis::Qubit).unwrap()).unwrap();
            assert!((purity(&rho) - (1.0 + r * r) / 2.0).abs() < 1e-12);
        }
    }
}
