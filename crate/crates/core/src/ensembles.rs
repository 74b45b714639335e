//! Samplers for random density-matrix ensembles.
//!
//! Every sampler draws from an explicit RNG stream; nothing here touches a
//! global generator.

use nalgebra::QR;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::qcore::{purity, tensor, DensityMatrix, PureState, UnitaryMatrix};
use crate::scalar::Real;

/// Cap on rejection-loop attempts in [`sample_separable`].
pub const SEPARABLE_MAX_ATTEMPTS: u64 = 1_000_000;

/// Default purity threshold for separable product states.
pub const SEPARABLE_PURITY_FLOOR: f64 = 1.0 / 3.0;

/// A complex standard normal draw: real and imaginary parts each `N(0, 1/2)`.
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let re = T::sample_standard_normal(rng) * s;
    let im = T::sample_standard_normal(rng) * s;
    Complex::new(re, im)
}

/// `D×D` matrix of i.i.d. complex standard normal entries.
pub fn ginibre<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T> {
    // column-major fill, matching nalgebra storage order
    CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with each column of `Q`
/// multiplied by the phase of the matching diagonal entry of `R`.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix<T> {
    let qr = QR::new(ginibre::<T, _>(dim, rng));
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = linalg::modulus(d);
        let phase = if n > T::zero() { d / c(n) } else { c(T::one()) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::from_matrix_unchecked(q)
}

/// Haar-random pure state. A normalized complex Gaussian vector has the same
/// law as the first column of a Haar unitary.
pub fn haar_pure<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState<T> {
    loop {
        let v = CVector::from_fn(dim, |_, _| complex_normal(rng));
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

/// `GG† / Tr(GG†)`.
pub fn sample_hs<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix<T> {
    let g = ginibre::<T, _>(dim, rng);
    DensityMatrix::normalize_unchecked(&g * g.adjoint()).expect("Ginibre product has positive trace")
}

/// `(1+U)GG†(1+U†)` normalized, with `U` Haar.
pub fn sample_bures<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix<T> {
    let u = haar_unitary::<T, _>(dim, rng);
    let g = ginibre::<T, _>(dim, rng);
    let a = (CMatrix::identity(dim, dim) + u.matrix()) * g;
    DensityMatrix::normalize_unchecked(&a * a.adjoint()).expect("Bures product has positive trace")
}

/// `(1-δ) ρ_HS + δ |ψ⟩⟨ψ|` with `δ ~ Uniform[0, 1]`.
pub fn sample_hs_haar<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix<T> {
    let delta = T::sample_unit(rng);
    sample_hs_haar_with_delta(dim, delta, rng)
}

/// HS–Haar mixture at a fixed weight `delta` on the pure component.
pub fn sample_hs_haar_with_delta<T: Real, R: Rng + ?Sized>(
    dim: usize,
    delta: T,
    rng: &mut R,
) -> DensityMatrix<T> {
    let hs = sample_hs::<T, _>(dim, rng);
    let pure = haar_pure::<T, _>(dim, rng).to_density();
    hs.mix(&pure, delta).expect("matching dimensions")
}

/// Symmetric Dirichlet draw of length `k` via normalized Gamma variates,
/// computed in log space.
pub fn sample_dirichlet<T: Real, R: Rng + ?Sized>(alpha: T, k: usize, rng: &mut R) -> Vec<T> {
    assert!(k >= 1, "Dirichlet needs at least one component");
    let logs: Vec<T> = (0..k).map(|_| T::sample_ln_gamma(alpha, rng)).collect();
    let max = logs.iter().copied().fold(logs[0], T::max);
    let mut x: Vec<T> = logs.iter().map(|&l| (l - max).exp()).collect();
    let total = x.iter().fold(T::zero(), |a, &b| a + b);
    x.iter_mut().for_each(|v| *v /= total);
    x
}

/// Mai–Alquier state: Dirichlet(α) mixture of `k` Haar-random pure states.
pub fn sample_ma<T: Real, R: Rng + ?Sized>(
    alpha: T,
    k: usize,
    dim: usize,
    rng: &mut R,
) -> DensityMatrix<T> {
    let weights = sample_dirichlet(alpha, k, rng);
    let mut acc = CMatrix::zeros(dim, dim);
    for w in weights {
        let psi = haar_pure::<T, _>(dim, rng);
        let a = psi.amplitudes();
        acc += (a * a.adjoint()).map(|z| z * w);
    }
    DensityMatrix::normalize_unchecked(acc).expect("convex mixture has unit trace")
}

/// Życzkowski state: Dirichlet(β) spectrum in a Haar-random basis.
pub fn sample_z<T: Real, R: Rng + ?Sized>(beta: T, dim: usize, rng: &mut R) -> DensityMatrix<T> {
    let spectrum = sample_dirichlet(beta, dim, rng);
    let u = haar_unitary::<T, _>(dim, rng);
    let m = crate::linalg::from_spectrum(&spectrum, u.matrix());
    DensityMatrix::normalize_unchecked(m).expect("spectrum sums to one")
}

/// MEMS parameter `γ ∈ [0, 1]`, equal to the state's concurrence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemsParam<T: Real>(T);

impl<T: Real> MemsParam<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(Error::OutOfDomain(format!("MEMS γ = {gamma} outside [0, 1]")));
        }
        Ok(Self(gamma))
    }

    pub fn gamma(self) -> T {
        self.0
    }

    /// `g(γ)`: `γ/2` for `γ ≥ 2/3`, else `1/3`.
    pub fn g(self) -> T {
        if self.0 >= T::lit(2.0) / T::lit(3.0) {
            self.0 / T::lit(2.0)
        } else {
            T::one() / T::lit(3.0)
        }
    }

    /// `1 - 4g + 6g² + γ²/2`.
    pub fn purity(self) -> T {
        let g = self.g();
        let two = T::lit(2.0);
        T::one() - T::lit(4.0) * g + T::lit(6.0) * g * g + self.0 * self.0 / two
    }
}

/// Maximally entangled mixed state in its canonical (unrotated) form.
pub fn mems_state<T: Real>(p: MemsParam<T>) -> DensityMatrix<T> {
    let g = p.g();
    let half_gamma = p.gamma() / T::lit(2.0);
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(g);
    m[(1, 1)] = c(T::one() - T::lit(2.0) * g);
    m[(3, 3)] = c(g);
    m[(0, 3)] = c(half_gamma);
    m[(3, 0)] = c(half_gamma);
    DensityMatrix::from_matrix_unchecked(m)
}

/// MEMS with `γ ~ Uniform(0, 1)` under independent single-qubit Haar rotations.
pub fn sample_mems_rotated<T: Real, R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix<T> {
    sample_mems_rotated_with_gamma(rng).0
}

/// As [`sample_mems_rotated`], also returning the drawn `γ`.
pub fn sample_mems_rotated_with_gamma<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
) -> (DensityMatrix<T>, T) {
    let gamma = T::sample_unit(rng);
    let base = mems_state(MemsParam(gamma));
    let ua = haar_unitary::<T, _>(2, rng);
    let ub = haar_unitary::<T, _>(2, rng);
    let rotated = base.conjugate(&ua.kron(&ub)).expect("4x4 local unitary");
    (rotated, gamma)
}

/// Outcome of the separable-product rejection loop.
#[derive(Clone, Debug)]
pub struct SeparableDraw<T: Real> {
    pub state: DensityMatrix<T>,
    pub attempts: u64,
}

/// `ρ_a ⊗ ρ_b` with single-qubit HS factors, redrawn until the product purity
/// exceeds `purity_floor`.
pub fn sample_separable_with_floor<T: Real, R: Rng + ?Sized>(
    purity_floor: T,
    rng: &mut R,
) -> Result<SeparableDraw<T>> {
    for attempt in 1..=SEPARABLE_MAX_ATTEMPTS {
        let a = sample_hs::<T, _>(2, rng);
        let b = sample_hs::<T, _>(2, rng);
        if purity(&a) * purity(&b) > purity_floor {
            return Ok(SeparableDraw { state: tensor(&a, &b), attempts: attempt });
        }
    }
    Err(Error::Infeasible(format!(
        "no separable product with purity above {purity_floor} in {SEPARABLE_MAX_ATTEMPTS} attempts"
    )))
}

/// Separable product state with purity above 1/3.
pub fn sample_separable<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Result<DensityMatrix<T>> {
    Ok(sample_separable_with_floor(T::lit(SEPARABLE_PURITY_FLOOR), rng)?.state)
}

/// Tagged description of a sampling distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EnsembleSpec {
    #[serde(rename = "HS")]
    Hs { dim: usize },
    Bures { dim: usize },
    #[serde(rename = "HSHaar")]
    HsHaar { dim: usize },
    #[serde(rename = "MA")]
    Ma { dim: usize, alpha: f64, k: usize },
    Z { dim: usize, beta: f64 },
    #[serde(rename = "MEMS")]
    Mems,
    SeparableProduct {
        #[serde(default)]
        purity_floor: Option<f64>,
    },
    HaarPure { dim: usize },
}

impl EnsembleSpec {
    pub fn dim(&self) -> usize {
        match *self {
            Self::Hs { dim }
            | Self::Bures { dim }
            | Self::HsHaar { dim }
            | Self::Ma { dim, .. }
            | Self::Z { dim, .. }
            | Self::HaarPure { dim } => dim,
            Self::Mems | Self::SeparableProduct { .. } => 4,
        }
    }

    /// Short label used in reports, e.g. `MA(0.3394,6)`.
    pub fn label(&self) -> String {
        match self {
            Self::Hs { .. } => "HS".into(),
            Self::Bures { .. } => "Bures".into(),
            Self::HsHaar { .. } => "HS-Haar".into(),
            Self::Ma { alpha, k, .. } => format!("MA({alpha},{k})"),
            Self::Z { beta, .. } => format!("Z({beta})"),
            Self::Mems => "MEMS".into(),
            Self::SeparableProduct { .. } => "Separable".into(),
            Self::HaarPure { .. } => "HaarPure".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        match *self {
            Self::Ma { alpha, k, .. } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::Config(format!("MA α must be positive, got {alpha}")));
                }
                if k < 1 {
                    return Err(Error::Config("MA K must be at least 1".into()));
                }
            }
            Self::Z { beta, .. } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::Config(format!("Z β must be positive, got {beta}")));
                }
            }
            Self::SeparableProduct { purity_floor: Some(f) } if !(0.0..1.0).contains(&f) => {
                return Err(Error::Config(format!("purity floor {f} outside [0, 1)")));
            }
            _ => {}
        }
        Ok(())
    }

    /// Draws one state.
    pub fn sample<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DensityMatrix<T>> {
        Ok(match *self {
            Self::Hs { dim } => sample_hs(dim, rng),
            Self::Bures { dim } => sample_bures(dim, rng),
            Self::HsHaar { dim } => sample_hs_haar(dim, rng),
            Self::Ma { dim, alpha, k } => sample_ma(T::lit(alpha), k, dim, rng),
            Self::Z { dim, beta } => sample_z(T::lit(beta), dim, rng),
            Self::Mems => sample_mems_rotated(rng),
            Self::SeparableProduct { purity_floor } => {
                let floor = T::lit(purity_floor.unwrap_or(SEPARABLE_PURITY_FLOOR));
                sample_separable_with_floor(floor, rng)?.state
            }
            Self::HaarPure { dim } => haar_pure(dim, rng).to_density(),
        })
    }
}

/// `n` independent draws from `spec`.
pub fn sample_ensemble<T: Real, R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    n: usize,
    rng: &mut R,
) -> Result<Vec<DensityMatrix<T>>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    (0..n).map(|_| spec.sample(rng)).collect()
}

/// `E[Tr ρ²]` of the MA distribution.
pub fn ma_mean_purity(alpha: f64, k: usize, dim: usize) -> f64 {
    let d = dim as f64;
    let k = k as f64;
    (d + alpha * (d + k - 1.0)) / (d * (1.0 + alpha * k))
}

/// `E[Tr ρ²]` of the Z distribution.
pub fn z_mean_purity(beta: f64, dim: usize) -> f64 {
    (1.0 + beta) / (1.0 + dim as f64 * beta)
}

/// Concentration `β` at which the Z distribution has the requested mean
/// purity, found by bisection on `z_mean_purity` (decreasing in `β`).
pub fn z_beta_for_mean_purity(target: f64, dim: usize) -> Result<f64> {
    let d = dim as f64;
    if !(target > 1.0 / d && target < 1.0) {
        return Err(Error::OutOfDomain(format!(
            "Z mean purity {target} must lie strictly between 1/D = {} and 1",
            1.0 / d
        )));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while z_mean_purity(hi, dim) > target {
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if z_mean_purity(mid, dim) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
