use std::time::Instant;

use log::info;
use qforge_core::ensembles::{sample_ensemble, EnsembleSpec};
use qforge_core::qcore::{concurrence, is_entangled_ppt, purity};
use qforge_nn::NetConfig;
use rand::seq::SliceRandom;

use super::{measure, net_label, seed_for, train_and_score, Dm};
use crate::config::RunConfig;
use crate::error::Result;
use crate::report::{Condition, RunReport, Table};
use crate::seeds::condition_rng;

/// MEMS-only training with a growing number of separable counterexamples;
/// PPT classification and fidelity on separable and MEMS test sets.
pub fn exp_spurious(cfg: &RunConfig) -> Result<RunReport> {
    let mut rng = condition_rng(cfg.seed, &["spurious", "test"]);
    let sep_test = sample_ensemble::<f64, _>(&EnsembleSpec::SeparableProduct { purity_floor: None }, cfg.n_test, &mut rng)?;
    let mems_test = sample_ensemble::<f64, _>(&EnsembleSpec::Mems, cfg.n_test, &mut rng)?;
    let sep_records = measure(&sep_test, 0, &mut rng)?;
    let mems_records = measure(&mems_test, 0, &mut rng)?;
    let scatter_test = if cfg.spurious.scatter {
        sample_ensemble::<f64, _>(&EnsembleSpec::Ma { dim: 4, alpha: 0.1, k: 4 }, cfg.n_test, &mut rng)?
    } else {
        Vec::new()
    };
    let scatter_records = measure(&scatter_test, 0, &mut rng)?;

    let net = NetConfig::new(2, cfg.nets[0].0, cfg.nets[0].1);
    let mut report = RunReport::new("spurious");
    let mut scatter = Table::new("scatter", &["n_s", "index", "purity", "concurrence", "fidelity"]);
    for &ns in &cfg.spurious.separable_counts {
        let ns_label = ns.to_string();
        info!("spurious: N_s = {ns}");
        let start = Instant::now();
        let mut rng = condition_rng(cfg.seed, &["spurious", "train", &ns_label]);
        let mut states = sample_ensemble::<f64, _>(&EnsembleSpec::Mems, cfg.n_train - ns, &mut rng)?;
        if ns > 0 {
            states.extend(sample_ensemble::<f64, _>(
                &EnsembleSpec::SeparableProduct { purity_floor: None },
                ns,
                &mut rng,
            )?);
        }
        states.shuffle(&mut rng);
        let records = measure(&states, 0, &mut rng)?;
        let seed = seed_for(cfg, &["spurious", "nets", &ns_label, &net_label(cfg.nets[0])]);
        let (nets, sep_pred, sep_f) =
            train_and_score(&states, &records, net, &cfg.train, seed, &sep_records, &sep_test)?;
        let mems_pred = super::reconstruct_all(&nets, &mems_records)?;
        let mems_f = super::fidelities(&mems_test, &mems_pred)?;
        let elapsed = start.elapsed().as_secs_f64();

        let sep_acc = accuracy(&sep_pred, false)?;
        let mems_acc = accuracy(&mems_pred, true)?;
        info!("N_s = {ns}: separable accuracy {sep_acc:.3}, MEMS accuracy {mems_acc:.3}");
        for (test, f, acc) in [("separable", sep_f, sep_acc), ("mems", mems_f, mems_acc)] {
            let mut c = Condition::new(&[("n_s", ns_label.clone()), ("test", test.into())], f);
            c.accuracy = Some(acc);
            c.wall_seconds = elapsed;
            report.conditions.push(c);
        }
        if !scatter_test.is_empty() {
            let pred = super::reconstruct_all(&nets, &scatter_records)?;
            let f = super::fidelities(&scatter_test, &pred)?;
            for (i, (rho, fi)) in scatter_test.iter().zip(f).enumerate() {
                scatter.push(vec![
                    ns_label.clone(),
                    i.to_string(),
                    purity(rho).to_string(),
                    concurrence(rho)?.to_string(),
                    fi.to_string(),
                ]);
            }
        }
    }
    if !scatter.rows.is_empty() {
        report.tables.push(scatter);
    }
    Ok(report)
}

/// Fraction of reconstructions whose PPT verdict equals `entangled`.
fn accuracy(predictions: &[Dm], entangled: bool) -> Result<f64> {
    let mut hits = 0usize;
    for rho in predictions {
        if is_entangled_ppt(rho)? == entangled {
            hits += 1;
        }
    }
    Ok(hits as f64 / predictions.len() as f64)
}
