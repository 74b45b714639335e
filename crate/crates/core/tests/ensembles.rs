mod common;

use qforge_core::ensembles::*;
use qforge_core::linalg;
use qforge_core::qcore::{concurrence, is_entangled_ppt, purity, DensityMatrix};
use std::f64::consts::PI;

const N: usize = 100_000;

fn purities(n: usize, mut f: impl FnMut() -> DensityMatrix<f64>) -> Vec<f64> {
    (0..n).map(|_| purity(&f())).collect()
}

#[test]
fn ginibre_moments() {
    let mut rng = common::rng(10);
    let mut re = Vec::with_capacity(N);
    let mut sq = Vec::with_capacity(N);
    for _ in 0..N / 16 {
        let g = ginibre::<f64, _>(4, &mut rng);
        for z in g.iter() {
            re.push(z.re);
            sq.push(z.norm_sqr());
        }
    }
    common::assert_mean_within(&re, 0.0, 4.0, "Re G");
    common::assert_mean_within(&sq, 1.0, 4.0, "|G|²");
}

#[test]
fn haar_trace_moment_and_eigenphases() {
    let mut rng = common::rng(11);
    let mut tr2 = Vec::with_capacity(N);
    let mut phases = Vec::new();
    for n in 0..N {
        let u = haar_unitary::<f64, _>(4, &mut rng);
        let t = linalg::trace(u.matrix());
        tr2.push(t.norm_sqr());
        if n < 5000 {
            let eig = u.matrix().clone().eigenvalues_complex();
            phases.extend(eig.iter().map(|z| z.arg()));
        }
        if n < 100 {
            let prod = u.matrix() * u.matrix().adjoint();
            assert!(linalg::max_abs_diff(&prod, &linalg::identity(4)) < 1e-10);
        }
    }
    common::assert_mean_within(&tr2, 1.0, 4.0, "|Tr U|²");
    let p = common::ks_one_sample(&phases, |x| (x + PI) / (2.0 * PI));
    assert!(p > 0.01, "eigenphase KS p = {p}");
}

trait ComplexEig {
    fn eigenvalues_complex(self) -> Vec<num_complex::Complex<f64>>;
}

impl ComplexEig for linalg::CMatrix<f64> {
    fn eigenvalues_complex(self) -> Vec<num_complex::Complex<f64>> {
        // unitary matrices are normal, so the Schur form is diagonal
        let schur = nalgebra::Schur::new(self);
        schur.unpack().1.diagonal().iter().copied().collect()
    }
}

#[test]
fn hs_mean_purity_and_full_rank() {
    let mut rng = common::rng(12);
    let mut p = Vec::with_capacity(N);
    for _ in 0..N {
        let rho = sample_hs::<f64, _>(4, &mut rng);
        p.push(purity(&rho));
        assert!(rho.eigenvalues()[0] > 0.0);
    }
    common::assert_mean_within(&p, 8.0 / 17.0, 3.0, "HS");
}

#[test]
fn hs_haar_and_bures_orderings() {
    let mut rng = common::rng(13);
    let hs = common::mean_sem(&purities(N, || sample_hs(4, &mut rng)));
    let hh = common::mean_sem(&purities(N, || sample_hs_haar(4, &mut rng)));
    let bu = common::mean_sem(&purities(N, || sample_bures(4, &mut rng)));
    let gap = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0) / (a.1.powi(2) + b.1.powi(2)).sqrt();
    assert!(gap(hh, hs) > 3.0, "HS-Haar {hh:?} vs HS {hs:?}");
    assert!(gap(hh, bu) > 3.0, "HS-Haar {hh:?} vs Bures {bu:?}");
}

#[test]
fn hs_haar_forced_delta_is_pure() {
    let mut rng = common::rng(14);
    let rho = sample_hs_haar_with_delta::<f64, _>(4, 1.0, &mut rng);
    assert!((purity(&rho) - 1.0).abs() < 1e-12);
}

#[test]
fn bures_is_unitarily_invariant() {
    let mut rng = common::rng(15);
    let u = haar_unitary::<f64, _>(4, &mut common::rng(99));
    let a = purities(20_000, || sample_bures(4, &mut rng));
    let b = purities(20_000, || sample_bures(4, &mut rng).conjugate(&u).unwrap());
    let p = common::ks_two_sample(&a, &b);
    assert!(p > 0.01, "KS p = {p}");
}

#[test]
fn dirichlet_moments() {
    let mut rng = common::rng(16);
    for (alpha, k) in [(0.1, 4), (0.5, 6), (1.0, 3), (2.5, 5)] {
        let mut first = Vec::with_capacity(N);
        let mut sq = Vec::with_capacity(N);
        for _ in 0..N {
            let x = sample_dirichlet::<f64, _>(alpha, k, &mut rng);
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            first.push(x[0]);
            sq.push(x.iter().map(|v| v * v).sum());
        }
        common::assert_mean_within(&first, 1.0 / k as f64, 3.0, "E[x0]");
        let want = (1.0 + alpha) / (1.0 + k as f64 * alpha);
        common::assert_mean_within(&sq, want, 3.0, "E[Σx²]");
    }
}

#[test]
fn ma_mean_purity_matches_closed_form() {
    let mut rng = common::rng(17);
    assert!((ma_mean_purity(0.1, 4, 4) - 4.7 / 5.6).abs() < 1e-12);
    assert!((ma_mean_purity(0.3394, 6, 4) - (4.0 + 0.3394 * 9.0) / (4.0 * (1.0 + 0.3394 * 6.0))).abs() < 1e-12);
    for (alpha, k) in [(0.1, 4), (0.3394, 6), (1.0, 8)] {
        let p = purities(N, || sample_ma(alpha, k, 4, &mut rng));
        common::assert_mean_within(&p, ma_mean_purity(alpha, k, 4), 3.0, "MA");
    }
}

#[test]
fn ma_single_term_is_pure_and_rank_bounded() {
    let mut rng = common::rng(18);
    for _ in 0..100 {
        assert!((purity(&sample_ma::<f64, _>(0.7, 1, 4, &mut rng)) - 1.0).abs() < 1e-12);
        let eig = sample_ma::<f64, _>(0.7, 2, 4, &mut rng).eigenvalues();
        assert!(eig[0].abs() < 1e-12 && eig[1].abs() < 1e-12);
    }
}

#[test]
fn ma_purity_decreases_with_k() {
    let mut rng = common::rng(19);
    let means: Vec<_> = (4..=8)
        .map(|k| common::mean_sem(&purities(50_000, || sample_ma(0.3394, k, 4, &mut rng))))
        .collect();
    for w in means.windows(2) {
        assert!(w[1].0 < w[0].0, "{means:?}");
    }
}

#[test]
fn z_mean_purity_matches_closed_form() {
    let mut rng = common::rng(20);
    assert!((z_mean_purity(1.0, 4) - 0.4).abs() < 1e-15);
    assert!((z_mean_purity(0.186, 4) - 0.68).abs() < 1e-3);
    for beta in [0.186, 1.0, 3.0] {
        let p = purities(N, || sample_z(beta, 4, &mut rng));
        common::assert_mean_within(&p, z_mean_purity(beta, 4), 3.0, "Z");
    }
    let p = purities(2000, || sample_z(1e6, 4, &mut rng));
    assert!((common::mean_sem(&p).0 - 0.25).abs() < 1e-4);
}

#[test]
fn z_beta_inversion() {
    let beta = z_beta_for_mean_purity(0.68, 4).unwrap();
    assert!((z_mean_purity(beta, 4) - 0.68).abs() < 1e-10);
    assert!(z_beta_for_mean_purity(0.2, 4).is_err());
}

#[test]
fn mems_concurrence_uniform() {
    let mut rng = common::rng(21);
    let mut cs = Vec::with_capacity(N);
    for _ in 0..N {
        let (rho, gamma) = sample_mems_rotated_with_gamma::<f64, _>(&mut rng);
        let c = concurrence(&rho).unwrap();
        assert!((c - gamma).abs() < 1e-8);
        assert!(purity(&rho) >= 1.0 / 3.0 - 1e-12);
        // partial-transpose minimum is about -0.75γ², so the 1e-9 tolerance
        // resolves γ above roughly 3.7e-5
        if gamma > 1e-4 {
            assert!(is_entangled_ppt(&rho).unwrap());
        }
        cs.push(c);
    }
    let p = common::ks_one_sample(&cs, |x| x.clamp(0.0, 1.0));
    assert!(p > 0.01, "KS p = {p}");
}

#[test]
fn separable_products() {
    let mut rng = common::rng(22);
    let mut attempts = 0u64;
    let n = 20_000;
    for _ in 0..n {
        let draw = sample_separable_with_floor::<f64, _>(1.0 / 3.0, &mut rng).unwrap();
        assert!(purity(&draw.state) > 1.0 / 3.0);
        assert!(!is_entangled_ppt(&draw.state).unwrap());
        attempts += draw.attempts;
    }
    let rate = n as f64 / attempts as f64;
    assert!(rate > 0.0 && rate < 1.0, "acceptance {rate}");

    // a second stream lands on the same acceptance rate
    let mut rng = common::rng(23);
    let attempts2: u64 = (0..n)
        .map(|_| sample_separable_with_floor::<f64, _>(1.0 / 3.0, &mut rng).unwrap().attempts)
        .sum();
    let rate2 = n as f64 / attempts2 as f64;
    assert!((rate - rate2).abs() < 0.02, "{rate} vs {rate2}");
}

#[test]
fn separable_cap_errors() {
    let mut rng = common::rng(24);
    assert!(sample_separable_with_floor::<f64, _>(1.0, &mut rng).is_err());
}

#[test]
fn every_sampler_produces_valid_states() {
    let mut rng = common::rng(25);
    let specs = [
        EnsembleSpec::Hs { dim: 4 },
        EnsembleSpec::Bures { dim: 4 },
        EnsembleSpec::HsHaar { dim: 4 },
        EnsembleSpec::Ma { dim: 4, alpha: 0.3394, k: 6 },
        EnsembleSpec::Z { dim: 4, beta: 0.186 },
        EnsembleSpec::Mems,
        EnsembleSpec::SeparableProduct { purity_floor: None },
        EnsembleSpec::HaarPure { dim: 4 },
    ];
    for spec in &specs {
        for rho in sample_ensemble::<f64, _>(spec, N, &mut rng).unwrap() {
            rho.check().unwrap_or_else(|e| panic!("{}: {e}", spec.label()));
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    let spec = EnsembleSpec::Hs { dim: 4 };
    let a = sample_ensemble::<f64, _>(&spec, 3, &mut common::rng(7)).unwrap();
    let b = sample_ensemble::<f64, _>(&spec, 3, &mut common::rng(7)).unwrap();
    assert_eq!(a, b);
    let ma = EnsembleSpec::Ma { dim: 4, alpha: 0.1, k: 4 };
    let p: Vec<f64> = sample_ensemble(&ma, 10_000, &mut common::rng(8))
        .unwrap()
        .iter()
        .map(purity::<f64>)
        .collect();
    common::assert_mean_within(&p, 4.7 / 5.6, 3.0, "MA via dispatch");
}

#[test]
fn invalid_specs_rejected() {
    let mut rng = common::rng(26);
    for spec in [
        EnsembleSpec::Ma { dim: 4, alpha: 0.0, k: 4 },
        EnsembleSpec::Ma { dim: 4, alpha: 0.1, k: 0 },
        EnsembleSpec::Z { dim: 4, beta: -1.0 },
        EnsembleSpec::Hs { dim: 0 },
    ] {
        assert!(sample_ensemble::<f64, _>(&spec, 1, &mut rng).is_err(), "{spec:?}");
    }
    assert!(sample_ensemble::<f64, _>(&EnsembleSpec::Hs { dim: 4 }, 0, &mut rng).is_err());
}

#[test]
fn single_precision_samplers() {
    let mut rng = common::rng(27);
    for _ in 0..1000 {
        sample_ma::<f32, _>(0.3394, 6, 4, &mut rng).check().unwrap();
        sample_z::<f32, _>(0.05, 4, &mut rng).check().unwrap();
        sample_bures::<f32, _>(4, &mut rng).check().unwrap();
    }
}
