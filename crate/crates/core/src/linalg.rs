// SPDX-License-Identifier: Apache-2.0

//! Dense complex kernels: fast products, the matrix exponential, Hermitian
//! eigendecomposition and the projections used by the reconstruction solver.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::scalar::Real;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

fn split<T: Real>(m: &CMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

/// Complex product through four real products.
///
/// nalgebra only routes `f32`/`f64` products to its blocked kernel, so this
/// is roughly an order of magnitude faster than `a * b` on complex entries.
pub fn cmatmul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    if a.nrows() * b.ncols() * a.ncols() < 4096 {
        return a * b;
    }
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex::new)
}

/// `y = m x` without going through nalgebra's generic complex gemv.
pub fn cmatvec<T: Real>(m: &CMatrix<T>, x: &[Complex<T>]) -> Vec<Complex<T>> {
    assert_eq!(m.ncols(), x.len());
    let n = m.nrows();
    let mut y = vec![Complex::new(T::zero(), T::zero()); n];
    for (j, xj) in x.iter().enumerate() {
        if xj.re == T::zero() && xj.im == T::zero() {
            continue;
        }
        let col = m.column(j);
        for (yi, mij) in y.iter_mut().zip(col.iter()) {
            *yi += *mij * *xj;
        }
    }
    y
}

/// Kronecker product with `a` as the outer (slow) factor.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

pub fn one_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.column_iter()
        .map(|c| c.iter().fold(T::zero(), |acc, z| acc + z.modulus()))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).modulus())
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with a [13/13] Padé approximant.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let norm = one_norm(a).as_f64();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = Complex::from(T::lit(0.5f64.powi(squarings)));
    let a = a.map(|z| z * scale);

    let c = |k: usize| Complex::from(T::lit(PADE13[k]));
    let id = identity::<T>(n);
    let a2 = cmatmul(&a, &a);
    let a4 = cmatmul(&a2, &a2);
    let a6 = cmatmul(&a4, &a2);

    let inner_u = a6.map(|z| z * c(13)) + a4.map(|z| z * c(11)) + a2.map(|z| z * c(9));
    let u_poly = cmatmul(&a6, &inner_u)
        + a6.map(|z| z * c(7))
        + a4.map(|z| z * c(5))
        + a2.map(|z| z * c(3))
        + id.map(|z| z * c(1));
    let u = cmatmul(&a, &u_poly);

    let inner_v = a6.map(|z| z * c(12)) + a4.map(|z| z * c(10)) + a2.map(|z| z * c(8));
    let v = cmatmul(&a6, &inner_v)
        + a6.map(|z| z * c(6))
        + a4.map(|z| z * c(4))
        + a2.map(|z| z * c(2))
        + id.map(|z| z * c(0));

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for scaled input");
    for _ in 0..squarings {
        r = cmatmul(&r, &r);
    }
    r
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
///
/// Only the lower triangle of `h` is read; callers symmetrize first when the
/// input carries round-off asymmetry.
pub fn eigh<T: Real>(h: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = SymmetricEigen::new(h.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn eigvalsh<T: Real>(h: &CMatrix<T>) -> Vec<T> {
    let mut v: Vec<T> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// `V diag(f(λ)) V†` for a Hermitian input.
pub fn hermitian_function<T: Real>(
    values: &[T],
    vectors: &CMatrix<T>,
    f: impl Fn(T) -> Complex<T>,
) -> CMatrix<T> {
    let mut scaled = vectors.clone();
    for (j, &lam) in values.iter().enumerate() {
        let w = f(lam);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= w);
    }
    cmatmul(&scaled, &vectors.adjoint())
}

pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = Complex::from(T::lit(0.5));
    (m + m.adjoint()).map(|z| z * half)
}

/// Euclidean projection onto the probability simplex `{p ≥ 0, Σp = 1}`.
///
/// Uses the sort-and-threshold rule: with values sorted descending, the
/// threshold is fixed by the last prefix whose shifted entries stay
/// positive. Ties keep their input order (stable sort), so the threshold is
/// reproducible bit-for-bit.
pub fn project_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let mut sorted: Vec<T> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumulative = T::zero();
    let mut threshold = T::zero();
    for (k, &value) in sorted.iter().enumerate() {
        cumulative += value;
        let candidate = (cumulative - T::one()) / T::lit((k + 1) as f64);
        if value - candidate > T::zero() {
            threshold = candidate;
        } else {
            break;
        }
    }
    v.iter()
        .map(|&x| {
            let y = x - threshold;
            if y > T::zero() {
                y
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Frobenius-nearest positive semidefinite, unit-trace matrix to the
/// Hermitian part of `m`.
pub fn project_density<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let h = hermitian_part(m);
    let (values, vectors) = eigh(&h);
    let projected = project_simplex(&values);
    let out = hermitian_function(&projected, &vectors, |x| Complex::from(x));
    hermitian_part(&out)
}

/// Principal square root of a positive semidefinite matrix; negative
/// round-off eigenvalues are clipped to zero.
pub fn sqrtm_psd<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let (values, vectors) = eigh(&hermitian_part(m));
    hermitian_function(&values, &vectors, |x| {
        Complex::from(if x > T::zero() { x.sqrt() } else { T::zero() })
    })
}
