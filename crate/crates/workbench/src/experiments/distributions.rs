use std::time::Instant;

use log::info;
use qforge_core::qcore::{concurrence, purity};
use qforge_nn::NetConfig;

use super::{draw_distribution, measure, net_label, nisq_ground_truths, resolve_band, seed_for, train_and_score};
use crate::config::RunConfig;
use crate::error::Result;
use crate::report::{Condition, RunReport, Table};
use crate::seeds::condition_rng;
use crate::stats::summarize;

/// Every training distribution crossed with every network size, scored on
/// the NISQ-style test set at `cfg.shots[0]`.
pub fn exp_distributions(cfg: &RunConfig) -> Result<RunReport> {
    let truths = nisq_ground_truths(cfg)?;
    let band = resolve_band(cfg, &truths)?;
    let shots = cfg.shots[0];
    let mut rng = condition_rng(cfg.seed, &["nisq-test", "shots", &shots.to_string()]);
    let test_records = measure(&truths, shots, &mut rng)?;

    let mut report = RunReport::new("distributions");
    let mut summary = Table::new(
        "summary",
        &[
            "distribution", "purity_mean", "purity_min", "purity_max", "concurrence_min", "concurrence_max",
            "largest_net", "mean_fidelity", "std_fidelity",
        ],
    );
    for dist in &cfg.distributions {
        let label = dist.label();
        let mut rng = condition_rng(cfg.seed, &["distributions", "train", &label]);
        let states = draw_distribution(dist, &band, cfg.engineer_k, cfg.n_train, &mut rng)?;
        let records = measure(&states, 0, &mut rng)?;
        let purities: Vec<f64> = states.iter().map(purity).collect();
        let concurrences = states.iter().map(concurrence).collect::<qforge_core::Result<Vec<f64>>>()?;
        let mut last = None;
        for &size in &cfg.nets {
            info!("distributions: {label}, net {}", net_label(size));
            let start = Instant::now();
            let seed = seed_for(cfg, &["distributions", "nets", &label, &net_label(size)]);
            let net = NetConfig::new(2, size.0, size.1);
            let (_, _, f) = train_and_score(&states, &records, net, &cfg.train, seed, &test_records, &truths)?;
            let mut c = Condition::new(
                &[("distribution", label.clone()), ("dense1", size.0.to_string()), ("dense2", size.1.to_string())],
                f,
            );
            c.wall_seconds = start.elapsed().as_secs_f64();
            info!("{label} {}: mean fidelity {:.4}", net_label(size), c.summary().mean);
            last = Some(c.summary());
            report.conditions.push(c);
        }
        let p = summarize(&purities).expect("non-empty training set");
        let cs = summarize(&concurrences).expect("non-empty training set");
        let largest = last.expect("at least one network size");
        summary.push(vec![
            label,
            p.mean.to_string(),
            p.min.to_string(),
            p.max.to_string(),
            cs.min.to_string(),
            cs.max.to_string(),
            net_label(*cfg.nets.last().expect("validated")),
            largest.mean.to_string(),
            largest.std.to_string(),
        ]);
    }
    report.tables.push(summary);
    Ok(report)
}
