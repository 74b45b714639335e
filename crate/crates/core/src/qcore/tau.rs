//! Cholesky parameterization of density matrices.
//!
//! A τ-vector of length `4^d` fills a lower-triangular `ζ` with
//! `ρ = ζζ† / Tr(ζζ†)`. The first `2^d` entries are the diagonal of `ζ`; the
//! rest sweep the sub-diagonals outward (offset 1 top to bottom, then offset
//! 2, ...), each entry contributing its real then its imaginary part. For two
//! qubits:
//!
//! ```text
//! τ0
//! τ4+iτ5    τ1
//! τ10+iτ11  τ6+iτ7    τ2
//! τ14+iτ15  τ12+iτ13  τ8+iτ9  τ3
//! ```

use nalgebra::Cholesky;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::qcore::state::{qubits_for_dim, DensityMatrix};
use crate::scalar::Real;

/// Eigenvalue floor applied before factorizing rank-deficient states.
pub const ENCODE_EIGEN_FLOOR: f64 = 1e-12;

/// Real parameter vector of a lower-triangular Cholesky factor.
#[derive(Clone, Debug, PartialEq)]
pub struct TauVector<T: Real> {
    qubits: usize,
    values: Vec<T>,
}

impl<T: Real> TauVector<T> {
    pub fn new(qubits: usize, values: Vec<T>) -> Result<Self> {
        let expected = 1usize << (2 * qubits);
        if values.len() != expected {
            return Err(Error::InvalidState(format!(
                "τ-vector for {qubits} qubits needs {expected} entries, got {}",
                values.len()
            )));
        }
        Ok(Self { qubits, values })
    }

    pub fn zeros(qubits: usize) -> Self {
        Self { qubits, values: vec![T::zero(); 1 << (2 * qubits)] }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }
}

/// Position of the off-diagonal entry `(row, col)` (row > col) in the sweep
/// order; its real part sits at the returned index, imaginary part at +1.
pub fn offdiag_index(dim: usize, row: usize, col: usize) -> usize {
    debug_assert!(row > col && row < dim);
    let offset = row - col;
    // entries on sub-diagonals 1..offset-1 precede this one
    let before: usize = (1..offset).map(|k| dim - k).sum();
    dim + 2 * (before + col)
}

/// The lower-triangular factor `ζ(τ)`.
pub fn cholesky_factor<T: Real>(tau: &TauVector<T>) -> CMatrix<T> {
    let dim = tau.dim();
    let v = tau.as_slice();
    let mut z = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        z[(i, i)] = c(v[i]);
    }
    for row in 1..dim {
        for col in 0..row {
            let k = offdiag_index(dim, row, col);
            z[(row, col)] = Complex::new(v[k], v[k + 1]);
        }
    }
    z
}

/// `ζζ† / Tr(ζζ†)`; always a valid density matrix.
pub fn tau_decode<T: Real>(tau: &TauVector<T>) -> Result<DensityMatrix<T>> {
    if tau.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateInput("τ-vector has non-finite entries".into()));
    }
    if tau.as_slice().iter().all(|x| *x == T::zero()) {
        return Err(Error::DegenerateInput("all-zero τ-vector".into()));
    }
    let z = cholesky_factor(tau);
    DensityMatrix::normalize_unchecked(&z * z.adjoint())
}

/// Cholesky parameters of `rho`, flooring eigenvalues at
/// [`ENCODE_EIGEN_FLOOR`] so rank-deficient states factorize.
pub fn tau_encode<T: Real>(rho: &DensityMatrix<T>) -> TauVector<T> {
    let dim = rho.dim();
    let qubits = qubits_for_dim(dim).expect("τ-vectors require a qubit dimension");
    let (mut vals, vecs) = linalg::hermitian_eigen(rho.matrix());
    let floor = T::tol(ENCODE_EIGEN_FLOOR);
    let mut total = T::zero();
    for v in vals.iter_mut() {
        *v = v.max(floor);
        total += *v;
    }
    for v in vals.iter_mut() {
        *v /= total;
    }
    let m = linalg::hermitize(&linalg::from_spectrum(&vals, &vecs));
    let l = Cholesky::new(m)
        .expect("floored spectrum is positive definite")
        .unpack();

    let mut out = vec![T::zero(); dim * dim];
    for i in 0..dim {
        out[i] = l[(i, i)].re;
    }
    for row in 1..dim {
        for col in 0..row {
            let k = offdiag_index(dim, row, col);
            out[k] = l[(row, col)].re;
            out[k + 1] = l[(row, col)].im;
        }
    }
    TauVector { qubits, values: out }
}
