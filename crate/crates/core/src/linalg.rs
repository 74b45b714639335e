//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::scalar::Real;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `|z|` without the `Float` bound `Complex::norm` needs.
#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    (0..m.nrows()).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + m[(i, i)])
}

/// `(m + m†) / 2`.
pub fn hermitize<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let half = T::lit(0.5);
    (m + m.adjoint()).map(|z| z * half)
}

pub fn max_hermitian_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let d = modulus(m[(i, j)] - m[(j, i)].conj());
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in ascending order; column `k` of the matrix is
/// the eigenvector of eigenvalue `k`.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = hermitize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let mut vals: Vec<T> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

/// `V diag(values) V†`.
pub fn from_spectrum<T: Real>(values: &[T], vectors: &CMatrix<T>) -> CMatrix<T> {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= v;
        }
    }
    scaled * vectors.adjoint()
}

/// Eigenvalues at or below this level are numerically indistinguishable from
/// zero for a positive semidefinite matrix with the given spectrum.
pub fn spectral_noise_floor<T: Real>(values: &[T]) -> T {
    let scale = values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    scale * T::eps() * T::lit_usize(16 * values.len().max(1))
}

/// Square root of a positive semidefinite matrix.
///
/// Negative eigenvalues and eigenvalues within the numerical noise floor are
/// clamped to zero before the root is taken.
pub fn psd_sqrt<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let (mut values, vectors) = hermitian_eigen(m);
    let floor = spectral_noise_floor(&values);
    for v in values.iter_mut() {
        *v = if *v > floor { v.sqrt() } else { T::zero() };
    }
    from_spectrum(&values, &vectors)
}

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::identity(dim, dim)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max(modulus(*x - *y)))
}
