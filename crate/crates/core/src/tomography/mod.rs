//! Pauli tomography simulation, linear inversion and maximum-likelihood
//! projection, plus an emulator for noisy-device test sets.
//!
//! Outcomes are indexed big-endian over qubits: qubit 0 is the most
//! significant bit, matching the Kronecker order of the state.

mod counts;
mod nisq;

pub use counts::{parse_counts_line, read_counts_jsonl, write_counts_jsonl, CountsLine};
pub use nisq::{
    build_nisq_test_set, emulate_nisq_state, NisqSample, NoiseSpec, CHARACTERIZATION_SHOTS,
};

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::qcore::{qubits_for_dim, DensityMatrix};
use crate::scalar::Real;

/// Single-qubit measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'X' => Some(Basis::X),
            'Y' => Some(Basis::Y),
            'Z' => Some(Basis::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }

    /// Columns are the eigenvectors for outcomes 0 (eigenvalue +1) and 1
    /// (eigenvalue −1), each with its largest-magnitude component (the first,
    /// on ties) real and positive.
    pub fn eigenbasis<T: Real>(self) -> CMatrix<T> {
        let s = T::one() / T::lit(2.0).sqrt();
        let z = c(T::zero());
        match self {
            Basis::X => CMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]),
            Basis::Y => CMatrix::from_row_slice(
                2,
                2,
                &[c(s), c(s), Complex::new(T::zero(), s), Complex::new(T::zero(), -s)],
            ),
            Basis::Z => CMatrix::from_row_slice(2, 2, &[c(T::one()), z, z, c(T::one())]),
        }
    }
}

/// One basis label per qubit, e.g. `XZ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliSetting(Vec<Basis>);

impl PauliSetting {
    pub fn new(bases: Vec<Basis>) -> Self {
        Self(bases)
    }

    /// All `3^d` settings in lexicographic order (X < Y < Z, qubit 0 first).
    pub fn enumerate(qubits: usize) -> Vec<Self> {
        (0..3usize.pow(qubits as u32)).map(|r| Self::from_rank(qubits, r)).collect()
    }

    pub fn from_rank(qubits: usize, mut rank: usize) -> Self {
        let mut bases = vec![Basis::X; qubits];
        for q in (0..qubits).rev() {
            bases[q] = Basis::ALL[rank % 3];
            rank /= 3;
        }
        Self(bases)
    }

    pub fn rank(&self) -> usize {
        self.0.iter().fold(0, |acc, b| acc * 3 + b.index())
    }

    pub fn qubits(&self) -> usize {
        self.0.len()
    }

    pub fn bases(&self) -> &[Basis] {
        &self.0
    }

    pub fn parse(label: &str) -> Result<Self> {
        label
            .chars()
            .map(|ch| {
                Basis::from_char(ch)
                    .ok_or_else(|| Error::Parse(format!("unknown basis label {ch:?} in {label:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|b| b.as_char()).collect()
    }

    /// `⊗_q V_q`; column `o` is the product eigenvector of outcome `o`.
    pub fn rotation<T: Real>(&self) -> CMatrix<T> {
        self.0
            .iter()
            .fold(CMatrix::identity(1, 1), |acc, b| linalg::kron(&acc, &b.eigenbasis()))
    }

    /// Rank-one projectors for every outcome of this setting.
    pub fn projectors<T: Real>(&self) -> Vec<CMatrix<T>> {
        let v = self.rotation::<T>();
        (0..v.ncols())
            .map(|o| {
                let col = v.column(o);
                col * col.adjoint()
            })
            .collect()
    }
}

impl fmt::Display for PauliSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Per-setting outcome frequencies for one state.
#[derive(Clone, Debug, PartialEq)]
pub struct TomographyRecord<T: Real> {
    qubits: usize,
    /// 0 encodes ideal (infinite-shot) probabilities.
    shots: u64,
    /// `frequencies[setting rank][outcome]`.
    frequencies: Vec<Vec<T>>,
    ground_truth: Option<DensityMatrix<T>>,
}

impl<T: Real> TomographyRecord<T> {
    pub const SUM_TOL: f64 = 1e-9;

    pub fn new(
        qubits: usize,
        shots: u64,
        frequencies: Vec<Vec<T>>,
        ground_truth: Option<DensityMatrix<T>>,
    ) -> Result<Self> {
        let settings = 3usize.pow(qubits as u32);
        let outcomes = 1usize << qubits;
        if frequencies.len() != settings {
            return Err(Error::InvalidState(format!(
                "{qubits}-qubit record needs {settings} settings, got {}",
                frequencies.len()
            )));
        }
        for (rank, f) in frequencies.iter().enumerate() {
            if f.len() != outcomes {
                return Err(Error::InvalidState(format!(
                    "setting {} has {} outcomes, expected {outcomes}",
                    PauliSetting::from_rank(qubits, rank),
                    f.len()
                )));
            }
            if f.iter().any(|x| !(*x >= T::zero()) || !x.is_finite()) {
                return Err(Error::InvalidState(format!(
                    "setting {} has a negative or non-finite frequency",
                    PauliSetting::from_rank(qubits, rank)
                )));
            }
            let sum = f.iter().fold(T::zero(), |a, &b| a + b);
            if (sum - T::one()).abs() > T::tol(Self::SUM_TOL) {
                return Err(Error::InvalidState(format!(
                    "setting {} frequencies sum to {sum}",
                    PauliSetting::from_rank(qubits, rank)
                )));
            }
        }
        if let Some(gt) = &ground_truth {
            if gt.dim() != outcomes {
                return Err(Error::DimensionMismatch { left: outcomes, right: gt.dim() });
            }
        }
        Ok(Self { qubits, shots, frequencies, ground_truth })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn is_ideal(&self) -> bool {
        self.shots == 0
    }

    pub fn frequencies(&self) -> &[Vec<T>] {
        &self.frequencies
    }

    pub fn frequencies_for(&self, setting: &PauliSetting) -> &[T] {
        &self.frequencies[setting.rank()]
    }

    pub fn ground_truth(&self) -> Option<&DensityMatrix<T>> {
        self.ground_truth.as_ref()
    }

    pub fn with_ground_truth(mut self, rho: DensityMatrix<T>) -> Self {
        self.ground_truth = Some(rho);
        self
    }

    pub fn without_ground_truth(mut self) -> Self {
        self.ground_truth = None;
        self
    }

    /// All `6^d` values, setting-major.
    pub fn flat(&self) -> Vec<T> {
        self.frequencies.iter().flatten().copied().collect()
    }
}

/// Born-rule probabilities for every Pauli setting (shots = 0).
pub fn ideal_probabilities<T: Real>(rho: &DensityMatrix<T>, qubits: usize) -> Result<TomographyRecord<T>> {
    if qubits_for_dim(rho.dim()) != Some(qubits) {
        return Err(Error::DimensionMismatch { left: 1 << qubits, right: rho.dim() });
    }
    let frequencies = PauliSetting::enumerate(qubits)
        .iter()
        .map(|s| {
            let v = s.rotation::<T>();
            let rotated = v.adjoint() * rho.matrix() * &v;
            let mut p: Vec<T> = (0..v.ncols()).map(|o| rotated[(o, o)].re.max(T::zero())).collect();
            let total = p.iter().fold(T::zero(), |a, &b| a + b);
            p.iter_mut().for_each(|x| *x /= total);
            p
        })
        .collect();
    Ok(TomographyRecord { qubits, shots: 0, frequencies, ground_truth: Some(rho.clone()) })
}

/// Multinomial counts at `shots` per setting, drawn from `record`'s
/// frequencies (normally an ideal record).
pub fn sample_counts<T: Real, R: Rng + ?Sized>(
    record: &TomographyRecord<T>,
    shots: u64,
    rng: &mut R,
) -> Result<TomographyRecord<T>> {
    if shots < 1 {
        return Err(Error::Config("shot count must be at least 1".into()));
    }
    let inv = T::one() / T::lit(shots as f64);
    let frequencies = record
        .frequencies
        .iter()
        .map(|p| {
            multinomial(p, shots, rng)
                .into_iter()
                .map(|n| T::lit(n as f64) * inv)
                .collect()
        })
        .collect();
    Ok(TomographyRecord {
        qubits: record.qubits,
        shots,
        frequencies,
        ground_truth: record.ground_truth.clone(),
    })
}

/// Multinomial draw via sequential conditional binomials.
pub fn multinomial<T: Real, R: Rng + ?Sized>(p: &[T], n: u64, rng: &mut R) -> Vec<u64> {
    let mut out = vec![0u64; p.len()];
    let mut left = n;
    let mut mass: f64 = p.iter().map(|x| x.to_f64()).sum();
    for (i, pi) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == p.len() {
            out[i] = left;
            break;
        }
        let pi = pi.to_f64();
        let q = if mass > 0.0 { (pi / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, q).expect("probability clamped to [0, 1]").sample(rng);
        out[i] = k;
        left -= k;
        mass -= pi;
    }
    out
}

/// Pauli-string expectation values `⟨σ_k⟩`, indexed base-4 with qubit 0 most
/// significant (0 = I, 1 = X, 2 = Y, 3 = Z). Each string is averaged over all
/// settings that measure it; the identity string is 1.
pub fn pauli_expectations<T: Real>(record: &TomographyRecord<T>) -> Vec<T> {
    let d = record.qubits;
    let n_strings = 1usize << (2 * d);
    let mut sum = vec![T::zero(); n_strings];
    let mut hits = vec![0usize; n_strings];
    for (rank, freqs) in record.frequencies.iter().enumerate() {
        let setting = PauliSetting::from_rank(d, rank);
        // mask bit (d-1-q) set ⇔ qubit q carries a non-identity Pauli
        for mask in 0..(1usize << d) {
            let mut string = 0usize;
            for (q, b) in setting.bases().iter().enumerate() {
                let code = if mask >> (d - 1 - q) & 1 == 1 { b.index() + 1 } else { 0 };
                string = string * 4 + code;
            }
            let e = freqs.iter().enumerate().fold(T::zero(), |acc, (o, &f)| {
                if (o & mask).count_ones() % 2 == 0 {
                    acc + f
                } else {
                    acc - f
                }
            });
            sum[string] += e;
            hits[string] += 1;
        }
    }
    let mut out: Vec<T> = sum
        .into_iter()
        .zip(hits)
        .map(|(s, h)| s / T::lit_usize(h))
        .collect();
    out[0] = T::one();
    out
}

/// `ρ̂ = 2^{-d} Σ_k ⟨σ_k⟩ σ_k`. Hermitian with unit trace, not necessarily
/// positive.
pub fn linear_inversion<T: Real>(record: &TomographyRecord<T>) -> CMatrix<T> {
    let d = record.qubits;
    let dim = 1usize << d;
    let expectations = pauli_expectations(record);
    let mut m = CMatrix::zeros(dim, dim);
    let i_unit = Complex::new(T::zero(), T::one());
    for (string, &e) in expectations.iter().enumerate() {
        if e == T::zero() {
            continue;
        }
        let codes: Vec<usize> = (0..d).map(|q| string >> (2 * (d - 1 - q)) & 3).collect();
        for row in 0..dim {
            let mut col = 0usize;
            let mut val = c(T::one());
            for (q, &code) in codes.iter().enumerate() {
                let bit = row >> (d - 1 - q) & 1;
                let (cbit, factor) = match code {
                    0 => (bit, c(T::one())),
                    1 => (bit ^ 1, c(T::one())),
                    // Y = [[0, -i], [i, 0]]
                    2 => (bit ^ 1, if bit == 0 { -i_unit } else { i_unit }),
                    _ => (bit, if bit == 0 { c(T::one()) } else { c(-T::one()) }),
                };
                col = col << 1 | cbit;
                val *= factor;
            }
            m[(row, col)] += val * e;
        }
    }
    let scale = T::one() / T::lit_usize(dim);
    linalg::hermitize(&m.map(|z| z * scale))
}

/// Nearest density matrix in spectrum: eigenvalues are visited from the
/// smallest up, and each one that is negative after the running correction is
/// zeroed with its weight spread equally over the eigenvalues above it.
/// Inputs are first rescaled to unit trace.
pub fn mle_project<T: Real>(h: &CMatrix<T>) -> Result<DensityMatrix<T>> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::InvalidState("expected a non-empty square matrix".into()));
    }
    let tr = linalg::trace(h).re;
    if !(tr > T::zero()) || !tr.is_finite() {
        return Err(Error::DegenerateInput(format!("trace {tr} is not positive")));
    }
    let scaled = linalg::hermitize(&h.map(|z| z / c(tr)));
    let (mut vals, vecs) = linalg::hermitian_eigen(&scaled);
    if vals[0] >= T::zero() {
        return Ok(DensityMatrix::from_matrix_unchecked(scaled));
    }
    project_spectrum(&mut vals);
    let m = linalg::hermitize(&linalg::from_spectrum(&vals, &vecs));
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// In-place projection of an ascending, unit-sum spectrum onto the simplex.
pub fn project_spectrum<T: Real>(ascending: &mut [T]) {
    let n = ascending.len();
    let mut carried = T::zero();
    let mut i = 0;
    // `n - i` eigenvalues remain above index i
    while i < n {
        let remaining = T::lit_usize(n - i);
        if ascending[i] + carried / remaining < T::zero() {
            carried += ascending[i];
            ascending[i] = T::zero();
            i += 1;
        } else {
            break;
        }
    }
    if i < n {
        let share = carried / T::lit_usize(n - i);
        for v in ascending[i..].iter_mut() {
            *v += share;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{fidelity, PureState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn settings_enumerate_lexicographically() {
        let labels: Vec<String> = PauliSetting::enumerate(2).iter().map(|s| s.label()).collect();
        assert_eq!(labels, ["XX", "XY", "XZ", "YX", "YY", "YZ", "ZX", "ZY", "ZZ"]);
        assert_eq!(PauliSetting::enumerate(3).len(), 27);
        assert_eq!(PauliSetting::parse("ZX").unwrap().rank(), 6);
        assert!(PauliSetting::parse("ZQ").is_err());
    }

    #[test]
    fn projectors_resolve_identity() {
        for d in 1..=3 {
            for s in PauliSetting::enumerate(d) {
                let sum = s
                    .projectors::<f64>()
                    .into_iter()
                    .fold(CMatrix::zeros(1 << d, 1 << d), |a, p| a + p);
                assert!(linalg::max_abs_diff(&sum, &linalg::identity(1 << d)) < 1e-12, "{s}");
            }
        }
    }

    #[test]
    fn ket00_zz() {
        let rec = ideal_probabilities(&DensityMatrix::<f64>::basis(4, 0), 2).unwrap();
        let zz = rec.frequencies_for(&PauliSetting::parse("ZZ").unwrap());
        assert_eq!(zz, &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn bell_zz_and_xx() {
        let rec = ideal_probabilities(&PureState::<f64>::bell().to_density(), 2).unwrap();
        let zz = rec.frequencies_for(&PauliSetting::parse("ZZ").unwrap());
        for (got, want) in zz.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        // Φ+ has ⟨XX⟩ = +1, ⟨YY⟩ = −1
        let xx = rec.frequencies_for(&PauliSetting::parse("XX").unwrap());
        assert!((xx[0] + xx[3] - 1.0).abs() < 1e-14);
        let yy = rec.frequencies_for(&PauliSetting::parse("YY").unwrap());
        assert!((yy[1] + yy[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_uniform() {
        let rec = ideal_probabilities(&DensityMatrix::<f64>::maximally_mixed(4), 2).unwrap();
        for f in rec.frequencies() {
            assert!(f.iter().all(|x| (x - 0.25).abs() < 1e-15));
        }
        let back = linear_inversion(&rec);
        assert!(linalg::max_abs_diff(&back, DensityMatrix::<f64>::maximally_mixed(4).matrix()) < 1e-15);
    }

    #[test]
    fn single_shot_is_one_hot() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rec = ideal_probabilities(&DensityMatrix::<f64>::maximally_mixed(4), 2).unwrap();
        let one = sample_counts(&rec, 1, &mut rng).unwrap();
        for f in one.frequencies() {
            assert_eq!(f.iter().filter(|x| **x == 1.0).count(), 1);
            assert_eq!(f.iter().filter(|x| **x == 0.0).count(), 3);
        }
        assert!(sample_counts(&rec, 0, &mut rng).is_err());
    }

    #[test]
    fn sampled_frequencies_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rec = ideal_probabilities(&crate::qcore::werner(0.7f64), 2).unwrap();
        let s = sample_counts(&rec, 1000, &mut rng).unwrap();
        for f in s.frequencies() {
            assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.shots(), 1000);
    }

    #[test]
    fn mle_projects_worked_example() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.2f64),
            c(0.1),
            c(-0.1),
            c(-0.2),
        ]));
        let rho = mle_project(&h).unwrap();
        let want = DensityMatrix::<f64>::basis(4, 0);
        assert!(linalg::max_abs_diff(rho.matrix(), want.matrix()) < 1e-12);
    }

    #[test]
    fn mle_is_identity_on_states() {
        let rho = crate::qcore::werner(0.3f64);
        let out = mle_project(rho.matrix()).unwrap();
        assert!(linalg::max_abs_diff(rho.matrix(), out.matrix()) < 1e-12);
    }

    #[test]
    fn spectrum_projection_hand_examples() {
        let mut v = [-0.2f64, -0.1, 0.1, 1.2];
        project_spectrum(&mut v);
        for (a, b) in v.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let mut v = [-0.1f64, 0.3, 0.8];
        project_spectrum(&mut v);
        for (a, b) in v.iter().zip([0.0, 0.25, 0.75]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn low_shot_inversion_can_be_unphysical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rec = ideal_probabilities(&DensityMatrix::<f64>::basis(4, 0), 2).unwrap();
        let mut seen_negative = false;
        for _ in 0..20 {
            let noisy = sample_counts(&rec, 128, &mut rng).unwrap();
            let h = linear_inversion(&noisy);
            if linalg::hermitian_eigenvalues(&h)[0] < 0.0 {
                seen_negative = true;
            }
            let rho = mle_project(&h).unwrap();
            rho.check().unwrap();
            assert!(fidelity(&rho, &DensityMatrix::basis(4, 0)).unwrap() > 0.8);
        }
        assert!(seen_negative);
    }
}
