use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::scalar::Real;

/// Tolerances a [`DensityMatrix`] must satisfy.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// Number of qubits `d` with `2^d == dim`, if `dim` is a power of two.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    (dim.is_power_of_two() && dim > 0).then(|| dim.trailing_zeros() as usize)
}

/// A Hermitian, positive semidefinite, unit-trace `D×D` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates all invariants.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        let rho = Self { m };
        rho.check()?;
        Ok(rho)
    }

    /// Hermitizes and divides by the trace, then validates positivity.
    pub fn normalized(m: CMatrix<T>) -> Result<Self> {
        let rho = Self::normalize_unchecked(m)?;
        rho.check()?;
        Ok(rho)
    }

    /// Hermitizes and divides by the trace without the eigenvalue check.
    /// For constructions known to be positive (`GG†`, convex mixtures).
    pub(crate) fn normalize_unchecked(m: CMatrix<T>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let h = linalg::hermitize(&m);
        let tr = linalg::trace(&h).re;
        if !(tr > T::zero()) || !tr.is_finite() {
            return Err(Error::DegenerateInput(format!("trace {tr} is not positive")));
        }
        let inv = T::one() / tr;
        Ok(Self { m: h.map(|z| z * inv) })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix<T>) -> Self {
        Self { m }
    }

    /// Checks Hermiticity, unit trace and positive semidefiniteness.
    pub fn check(&self) -> Result<()> {
        let m = &self.m;
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = linalg::max_hermitian_defect(m);
        if herm > T::tol(HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm})")));
        }
        let tr = linalg::trace(m);
        if linalg::modulus(tr - c(T::one())) > T::tol(TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = self.eigenvalues()[0];
        if min_eig < -T::tol(PSD_TOL) {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig}")));
        }
        Ok(())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::lit_usize(dim);
        Self { m: CMatrix::from_diagonal_element(dim, dim, c(w)) }
    }

    /// Projector onto computational basis state `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        PureState::basis(dim, index).to_density()
    }

    /// Real diagonal state from a probability vector (validated).
    pub fn diagonal(weights: &[T]) -> Result<Self> {
        let n = weights.len();
        Self::new(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(weights[i])
            } else {
                c(T::zero())
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn qubits(&self) -> Option<usize> {
        qubits_for_dim(self.dim())
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.m[(i, j)]
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::hermitian_eigenvalues(&self.m)
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &UnitaryMatrix<T>) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: u.dim(), right: self.dim() });
        }
        let m = &u.m * &self.m * u.m.adjoint();
        Ok(Self { m: linalg::hermitize(&m) })
    }

    /// Convex combination `(1 - w) self + w other`.
    pub fn mix(&self, other: &Self, w: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        let w = w.max(T::zero()).min(T::one());
        let a = T::one() - w;
        Ok(Self { m: self.m.map(|z| z * a) + other.m.map(|z| z * w) })
    }

    /// Entrywise average of equally weighted states, renormalized to unit trace.
    pub fn average(states: &[Self]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::DegenerateInput("cannot average zero states".into()))?;
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        for s in states {
            if s.dim() != first.dim() {
                return Err(Error::DimensionMismatch { left: first.dim(), right: s.dim() });
            }
            acc += &s.m;
        }
        Self::normalize_unchecked(acc)
    }

    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        DensityMatrix {
            m: self.m.map(|z| Complex::new(U::lit(z.re.to_f64()), U::lit(z.im.to_f64()))),
        }
    }
}

/// A unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T: Real> {
    amps: CVector<T>,
}

impl<T: Real> PureState<T> {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(amps: CVector<T>) -> Result<Self> {
        let norm = amps.norm();
        if (norm - T::one()).abs() > T::tol(Self::NORM_TOL) {
            return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amps })
    }

    pub fn normalized(amps: CVector<T>) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::DegenerateInput("zero vector has no direction".into()));
        }
        let inv = T::one() / norm;
        Ok(Self { amps: amps.map(|z| z * inv) })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = CVector::zeros(dim);
        amps[index] = c(T::one());
        Self { amps }
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        let a = c(T::one() / T::lit(2.0).sqrt());
        let z = c(T::zero());
        Self { amps: CVector::from_vec(vec![a, z, z, a]) }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amps
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_matrix_unchecked(&self.amps * self.amps.adjoint())
    }
}

/// A `D×D` unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> UnitaryMatrix<T> {
    pub const UNITARITY_TOL: f64 = 1e-10;

    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidState("unitary must be square".into()));
        }
        let dim = m.nrows();
        let defect = linalg::max_abs_diff(&(&m * m.adjoint()), &linalg::identity(dim));
        if defect > T::tol(Self::UNITARITY_TOL) {
            return Err(Error::InvalidState(format!("U U† deviates from identity by {defect}")));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix<T>) -> Self {
        Self { m }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: linalg::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self { m: linalg::kron(&self.m, &other.m) }
    }

    /// Column `j` as a pure state.
    pub fn column(&self, j: usize) -> PureState<T> {
        PureState { amps: self.m.column(j).into_owned() }
    }
}
