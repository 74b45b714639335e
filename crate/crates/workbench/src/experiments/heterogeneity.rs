use std::time::Instant;

use log::info;
use qforge_core::ensembles::{sample_ensemble, EnsembleSpec};
use qforge_core::qcore::purity;
use qforge_nn::NetConfig;

use super::{measure, net_label, seed_for, train_and_score, Dm};
use crate::config::RunConfig;
use crate::error::Result;
use crate::report::{Condition, RunReport, Table};
use crate::seeds::condition_rng;
use crate::stats::summarize;

/// Purity bins: 10 equal-width bins on [0.3, 1.0].
pub const PURITY_BINS: (f64, f64, usize) = (0.3, 1.0, 10);

/// Bin index of a purity, `None` outside the binned range. The last bin is
/// closed on the right.
pub fn purity_bin(p: f64) -> Option<usize> {
    let (lo, hi, n) = PURITY_BINS;
    if !(lo..=hi).contains(&p) {
        return None;
    }
    Some((((p - lo) / (hi - lo) * n as f64) as usize).min(n - 1))
}

/// Per-bin fidelity lists.
pub fn purity_bins(truths: &[Dm], fidelities: &[f64]) -> Vec<Vec<f64>> {
    let mut bins = vec![Vec::new(); PURITY_BINS.2];
    for (rho, &f) in truths.iter().zip(fidelities) {
        if let Some(b) = purity_bin(purity(rho)) {
            bins[b].push(f);
        }
    }
    bins
}

/// MA(α, K_test) test sets reconstructed by networks trained at several K.
pub fn exp_heterogeneity(cfg: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new("heterogeneity");
    let mut table = Table::new(
        "bins",
        &["qubits", "k", "bin", "purity_lo", "purity_hi", "count", "mean_fidelity", "std_fidelity"],
    );
    let size = cfg.nets[0];
    for case in &cfg.heterogeneity {
        let q = case.qubits;
        let dim = 1usize << q;
        let qs = q.to_string();
        let mut rng = condition_rng(cfg.seed, &["heterogeneity", "test", &qs]);
        let test_spec = EnsembleSpec::Ma { dim, alpha: case.alpha, k: case.test_k };
        let truths = sample_ensemble::<f64, _>(&test_spec, cfg.n_test, &mut rng)?;
        let test_records = measure(&truths, 0, &mut rng)?;
        for &k in &case.train_ks {
            let ks = k.to_string();
            info!("heterogeneity: {q} qubits, K = {k}");
            let start = Instant::now();
            let mut rng = condition_rng(cfg.seed, &["heterogeneity", "train", &qs, &ks]);
            let spec = EnsembleSpec::Ma { dim, alpha: case.alpha, k };
            let states = sample_ensemble::<f64, _>(&spec, cfg.n_train, &mut rng)?;
            let records = measure(&states, 0, &mut rng)?;
            let seed = seed_for(cfg, &["heterogeneity", "nets", &qs, &ks, &net_label(size)]);
            let net = NetConfig::new(q, size.0, size.1);
            let (_, _, f) = train_and_score(&states, &records, net, &cfg.train, seed, &test_records, &truths)?;
            let (lo, hi, n) = PURITY_BINS;
            // edges rounded so the CSV reads 0.44 rather than 0.43999999999999995
            let edge = |b: usize| ((lo + (hi - lo) * b as f64 / n as f64) * 1e9).round() / 1e9;
            for (b, list) in purity_bins(&truths, &f).iter().enumerate() {
                let s = summarize(list);
                table.push(vec![
                    qs.clone(),
                    ks.clone(),
                    b.to_string(),
                    edge(b).to_string(),
                    edge(b + 1).to_string(),
                    list.len().to_string(),
                    s.map(|s| s.mean.to_string()).unwrap_or_default(),
                    s.map(|s| s.std.to_string()).unwrap_or_default(),
                ]);
            }
            let mut c = Condition::new(&[("qubits", qs.clone()), ("k", ks)], f);
            c.wall_seconds = start.elapsed().as_secs_f64();
            report.conditions.push(c);
        }
    }
    report.tables.push(table);
    Ok(report)
}
