//! Quantum-state types, state metrics and the τ-vector codec.

mod metrics;
mod state;
mod tau;

pub use metrics::{
    concurrence, fidelity, is_entangled_ppt, partial_transpose_b, purity, tensor, werner,
    wootters_lambdas, PPT_TOL,
};
pub use state::{
    qubits_for_dim, DensityMatrix, PureState, UnitaryMatrix, HERMITIAN_TOL, PSD_TOL, TRACE_TOL,
};
pub use tau::{cholesky_factor, offdiag_index, tau_decode, tau_encode, TauVector, ENCODE_EIGEN_FLOOR};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::{c, CMatrix};

    fn ket00() -> DensityMatrix<f64> {
        DensityMatrix::basis(4, 0)
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&DensityMatrix::<f64>::maximally_mixed(4)) - 0.25).abs() < 1e-15);
        assert!((purity(&PureState::<f64>::bell().to_density()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let rho = werner(0.3f64);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        let f = fidelity(&ket00(), &DensityMatrix::basis(4, 3)).unwrap();
        assert!(f.abs() < 1e-12);
        // pure second argument: F = ⟨ψ|ρ|ψ⟩
        let f = fidelity(&DensityMatrix::maximally_mixed(4), &ket00()).unwrap();
        assert!((f - 0.25).abs() < 1e-12, "{f}");
        let f2 = fidelity(&ket00(), &DensityMatrix::maximally_mixed(4)).unwrap();
        assert!((f - f2).abs() < 1e-8);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let err = fidelity(&DensityMatrix::<f64>::maximally_mixed(2), &ket00()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn concurrence_examples() {
        let bell = PureState::<f64>::bell().to_density();
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-12);
        assert!(concurrence(&DensityMatrix::<f64>::maximally_mixed(4)).unwrap().abs() < 1e-12);
        let c = concurrence(&werner(0.5f64)).unwrap();
        assert!((c - 0.25).abs() < 1e-12, "{c}");
    }

    #[test]
    fn concurrence_rejects_other_dims() {
        let err = concurrence(&DensityMatrix::<f64>::maximally_mixed(8)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedDimension { found: 8, .. }));
        assert!(is_entangled_ppt(&DensityMatrix::<f64>::maximally_mixed(2)).is_err());
    }

    #[test]
    fn ppt_examples() {
        assert!(is_entangled_ppt(&PureState::<f64>::bell().to_density()).unwrap());
        assert!(is_entangled_ppt(&werner(0.4)).unwrap());
        assert!(!is_entangled_ppt(&werner(0.3)).unwrap());
        let prod = tensor(&DensityMatrix::<f64>::basis(2, 0), &DensityMatrix::maximally_mixed(2));
        assert!(!is_entangled_ppt(&prod).unwrap());
    }

    #[test]
    fn tensor_examples() {
        let k = tensor(&DensityMatrix::<f64>::basis(2, 0), &DensityMatrix::basis(2, 0));
        assert_eq!(k, ket00());
        let mm = tensor(
            &DensityMatrix::<f64>::maximally_mixed(2),
            &DensityMatrix::maximally_mixed(2),
        );
        assert_eq!(mm, DensityMatrix::maximally_mixed(4));
    }

    #[test]
    fn tau_decode_examples() {
        let mut v = vec![0.0; 16];
        v[0] = 1.0;
        let rho = tau_decode(&TauVector::new(2, v).unwrap()).unwrap();
        assert_eq!(rho, ket00());

        for cval in [0.1, 1.0, 7.5] {
            let mut v = vec![0.0; 16];
            v[..4].iter_mut().for_each(|x| *x = cval);
            let rho = tau_decode(&TauVector::new(2, v).unwrap()).unwrap();
            assert!(crate::linalg::max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed(4).matrix()) < 1e-15);
        }
    }

    #[test]
    fn tau_encode_examples() {
        let tau = tau_encode(&ket00());
        assert!((tau.as_slice()[0] - 1.0).abs() < 1e-10);
        assert!(tau.as_slice()[1..].iter().all(|x| x.abs() < 1e-5));

        let tau = tau_encode(&DensityMatrix::<f64>::maximally_mixed(4));
        for (i, x) in tau.as_slice().iter().enumerate() {
            let want = if i < 4 { 0.5 } else { 0.0 };
            assert!((x - want).abs() < 1e-12, "τ{i} = {x}");
        }
    }

    #[test]
    fn tau_roundtrip_on_structured_state() {
        let m = CMatrix::<f64>::from_fn(4, 4, |i, j| {
            if i == j {
                c(1.0 + i as f64)
            } else {
                num_complex::Complex::new(0.1 * (i + j) as f64, 0.05 * (i as f64 - j as f64))
            }
        });
        let rho = DensityMatrix::normalized(m).unwrap();
        let back = tau_decode(&tau_encode(&rho)).unwrap();
        assert!(fidelity(&rho, &back).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn single_precision_metrics() {
        let rho = werner(0.5f32);
        assert!((concurrence(&rho).unwrap() - 0.25).abs() < 1e-5);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-5);
        let back = tau_decode(&tau_encode(&rho)).unwrap();
        back.check().unwrap();
    }
}
