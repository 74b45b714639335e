use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::qcore::state::DensityMatrix;
use crate::scalar::Real;

/// Eigenvalue threshold below which a partial transpose counts as positive.
pub const PPT_TOL: f64 = 1e-9;

/// `Tr ρ²`.
pub fn purity<T: Real>(rho: &DensityMatrix<T>) -> T {
    // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
    rho.matrix().iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Uhlmann fidelity `[Tr √(√a b √a)]²`, clamped to `[0, 1]`.
pub fn fidelity<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    // Tr√(√a b √a) is the trace norm of √a√b, and with A = V·diag(√λ) that
    // equals the trace norm of A_a†A_b; singular values avoid a second root
    let m = sqrt_factor(a).adjoint() * sqrt_factor(b);
    let root_trace = SVD::new(m, false, false)
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc + s);
    Ok((root_trace * root_trace).min(T::one()).max(T::zero()))
}

/// `V·diag(√λ)`, with eigenvalues under the spectral noise floor zeroed.
fn sqrt_factor<T: Real>(rho: &DensityMatrix<T>) -> CMatrix<T> {
    let (vals, mut vecs) = linalg::hermitian_eigen(rho.matrix());
    let floor = linalg::spectral_noise_floor(&vals);
    for (j, &p) in vals.iter().enumerate() {
        let w = if p > floor { p.sqrt() } else { T::zero() };
        vecs.column_mut(j).scale_mut(w);
    }
    vecs
}

fn require_two_qubits<T: Real>(rho: &DensityMatrix<T>) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::UnsupportedDimension {
            expected: "two-qubit states (D = 4) only",
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `σ_y ⊗ σ_y`, which is real.
fn spin_flip<T: Real>() -> CMatrix<T> {
    let one = c(T::one());
    let z = c(T::zero());
    CMatrix::from_row_slice(
        4,
        4,
        &[z, z, z, -one, z, z, one, z, z, one, z, z, -one, z, z, z],
    )
}

/// Eigenvalues of `R = √(√ρ ρ̃ √ρ)` in descending order, where
/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
///
/// With `ρ = A A†` the nonzero spectrum of `R` equals the singular values of
/// the complex-symmetric matrix `Aᵀ (σ_y⊗σ_y) A`, which avoids square roots of
/// eigenvalues sitting at rounding level for rank-deficient states.
pub fn wootters_lambdas<T: Real>(rho: &DensityMatrix<T>) -> Result<[T; 4]> {
    require_two_qubits(rho)?;
    let a = sqrt_factor(rho);
    let m = a.transpose() * spin_flip::<T>() * &a;
    let sv = SVD::new(m, false, false).singular_values;
    let mut out = [T::zero(); 4];
    for (o, s) in out.iter_mut().zip(sv.iter()) {
        *o = *s;
    }
    out.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let l = wootters_lambdas(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).max(T::zero()).min(T::one()))
}

/// Partial transpose over the second qubit of a two-qubit matrix.
pub fn partial_transpose_b<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let mut out = CMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    out[(2 * a + b, 2 * a2 + b2)] = m[(2 * a + b2, 2 * a2 + b)];
                }
            }
        }
    }
    out
}

/// Peres–Horodecki test: entangled iff the partial transpose has an eigenvalue
/// below `-PPT_TOL`. Exact for two qubits.
pub fn is_entangled_ppt<T: Real>(rho: &DensityMatrix<T>) -> Result<bool> {
    require_two_qubits(rho)?;
    let pt = partial_transpose_b(rho.matrix());
    let min = linalg::hermitian_eigenvalues(&pt)[0];
    Ok(min < -T::lit(PPT_TOL))
}

/// Kronecker product `a ⊗ b`.
pub fn tensor<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> DensityMatrix<T> {
    DensityMatrix::from_matrix_unchecked(linalg::kron(a.matrix(), b.matrix()))
}

/// `p |Φ+⟩⟨Φ+| + (1 - p) I/4`.
pub fn werner<T: Real>(p: T) -> DensityMatrix<T> {
    let bell = crate::qcore::PureState::bell().to_density();
    DensityMatrix::maximally_mixed(4)
        .mix(&bell, p)
        .expect("matching dimensions")
}
