//! Depolarizing-channel stand-in for a noisy device.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ideal_probabilities, linear_inversion, mle_project, sample_counts, TomographyRecord};
use crate::ensembles::haar_pure;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::qcore::{qubits_for_dim, DensityMatrix, PureState};
use crate::scalar::Real;

/// Shots per setting used to characterize emulated states before the
/// requested resimulation.
pub const CHARACTERIZATION_SHOTS: u64 = 8192;

/// Channel strengths, each drawn uniformly per state from a closed range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Single-qubit depolarizing probability applied to every qubit.
    pub local: (f64, f64),
    /// Global depolarizing probability `p` in `(1-p)ρ + p·I/D`.
    pub global: (f64, f64),
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { local: (0.0, 0.03), global: (0.02, 0.2) }
    }
}

impl NoiseSpec {
    pub const NOISELESS: NoiseSpec = NoiseSpec { local: (0.0, 0.0), global: (0.0, 0.0) };

    pub fn fixed(local: f64, global: f64) -> Self {
        Self { local: (local, local), global: (global, global) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("local", self.local), ("global", self.global)] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::Config(format!(
                    "{name} depolarizing range [{lo}, {hi}] must lie within [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

fn draw<R: Rng + ?Sized>((lo, hi): (f64, f64), rng: &mut R) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// `ρ ↦ (1 - 3p/4)ρ + (p/4)(XρX + YρY + ZρZ)` on `qubit`.
fn depolarize_qubit<T: Real>(m: &CMatrix<T>, qubit: usize, qubits: usize, p: T) -> CMatrix<T> {
    let dim = m.nrows();
    let shift = qubits - 1 - qubit;
    let flip = 1usize << shift;
    // σ_a ρ σ_a summed over a = X, Y, Z, written entrywise
    let mut pauli_sum = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let bi = (i >> shift) & 1;
            let bj = (j >> shift) & 1;
            let z_sign = if bi == bj { T::one() } else { -T::one() };
            let flipped = m[(i ^ flip, j ^ flip)];
            // X and Y contribute the flipped entry with signs +1 and z_sign
            pauli_sum[(i, j)] = flipped * c(T::one() + z_sign) + m[(i, j)] * c(z_sign);
        }
    }
    let keep = T::one() - T::lit(0.75) * p;
    let quarter = p / T::lit(4.0);
    m.map(|z| z * keep) + pauli_sum.map(|z| z * quarter)
}

/// Noisy copy of `target`: local channels on each qubit, then a global one.
pub fn emulate_nisq_state<T: Real, R: Rng + ?Sized>(
    target: &PureState<T>,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<DensityMatrix<T>> {
    noise.validate()?;
    let dim = target.dim();
    let qubits = qubits_for_dim(dim)
        .ok_or(Error::UnsupportedDimension { expected: "a power of two", found: dim })?;
    let mut m = target.to_density().into_matrix();
    for q in 0..qubits {
        let p = T::lit(draw(noise.local, rng));
        if p > T::zero() {
            m = depolarize_qubit(&m, q, qubits, p);
        }
    }
    let g = T::lit(draw(noise.global, rng));
    let mixed = linalg::identity::<T>(dim).map(|z| z / c(T::lit_usize(dim)));
    m = m.map(|z| z * (T::one() - g)) + mixed.map(|z| z * g);
    DensityMatrix::normalize_unchecked(m)
}

/// One emulated test state and its tomography record.
#[derive(Clone, Debug)]
pub struct NisqSample<T: Real> {
    pub ground_truth: DensityMatrix<T>,
    pub record: TomographyRecord<T>,
}

/// Haar targets → emulated noise → tomography at [`CHARACTERIZATION_SHOTS`]
/// → linear inversion → MLE. The MLE states are the ground truths; each is
/// resimulated at `shots` (0 for ideal records).
pub fn build_nisq_test_set<T: Real, R: Rng + ?Sized>(
    n: usize,
    qubits: usize,
    shots: u64,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<NisqSample<T>>> {
    noise.validate()?;
    let dim = 1usize << qubits;
    (0..n)
        .map(|_| {
            let target = haar_pure::<T, _>(dim, rng);
            let noisy = emulate_nisq_state(&target, noise, rng)?;
            let characterized =
                sample_counts(&ideal_probabilities(&noisy, qubits)?, CHARACTERIZATION_SHOTS, rng)?;
            let ground_truth = mle_project(&linear_inversion(&characterized))?;
            resimulate(ground_truth, qubits, shots, rng)
        })
        .collect()
}

/// Fresh tomography of a known state at `shots` (0 = ideal).
pub fn resimulate<T: Real, R: Rng + ?Sized>(
    ground_truth: DensityMatrix<T>,
    qubits: usize,
    shots: u64,
    rng: &mut R,
) -> Result<NisqSample<T>> {
    let ideal = ideal_probabilities(&ground_truth, qubits)?;
    let record = if shots == 0 { ideal } else { sample_counts(&ideal, shots, rng)? };
    Ok(NisqSample { ground_truth, record })
}
