use std::time::Instant;

use log::info;
use qforge_core::tomography::sample_counts;
use qforge_nn::NetConfig;

use super::{
    draw_distribution, fidelities, measure, net_label, nisq_ground_truths, reconstruct_all, resolve_band, seed_for,
    train_trials, training_set,
};
use crate::config::{Distribution, RunConfig};
use crate::error::Result;
use crate::report::{Condition, RunReport};
use crate::seeds::condition_rng;

/// Ideal-record training against shot-matched training at each level.
///
/// Both arms share the training states, the network initializations and the
/// shuffling streams; only the training records differ.
pub fn exp_shots(cfg: &RunConfig) -> Result<RunReport> {
    let truths = nisq_ground_truths(cfg)?;
    let band = resolve_band(cfg, &truths)?;
    let size = cfg.nets[0];
    let net = NetConfig::new(2, size.0, size.1);
    let mut rng = condition_rng(cfg.seed, &["shots", "train"]);
    let states = draw_distribution(&Distribution::Engineered, &band, cfg.engineer_k, cfg.n_train, &mut rng)?;
    let ideal_records = measure(&states, 0, &mut rng)?;
    let nets_seed = seed_for(cfg, &["shots", "nets", &net_label(size)]);

    info!("shots: training on ideal records");
    let start = Instant::now();
    let ideal_nets = train_trials(&training_set(&states, &ideal_records)?, net, &cfg.train, nets_seed)?;
    let ideal_seconds = start.elapsed().as_secs_f64();

    let mut report = RunReport::new("shots");
    for &shots in &cfg.shots {
        let s = shots.to_string();
        let mut rng = condition_rng(cfg.seed, &["shots", "test", &s]);
        let test_records = measure(&truths, shots, &mut rng)?;
        debug_assert!(test_records.iter().all(|r| r.frequencies().iter().all(|f| (f.iter().sum::<f64>() - 1.0).abs() < 1e-9)));

        let f = fidelities(&truths, &reconstruct_all(&ideal_nets, &test_records)?)?;
        let mut c = Condition::new(&[("shots", s.clone()), ("training", "ideal".into())], f);
        c.wall_seconds = ideal_seconds;
        report.conditions.push(c);

        info!("shots: training on {shots}-shot records");
        let start = Instant::now();
        let matched_records = if shots == 0 {
            ideal_records.clone()
        } else {
            let mut rng = condition_rng(cfg.seed, &["shots", "train-records", &s]);
            ideal_records.iter().map(|r| sample_counts(r, shots, &mut rng)).collect::<qforge_core::Result<Vec<_>>>()?
        };
        let matched = train_trials(&training_set(&states, &matched_records)?, net, &cfg.train, nets_seed)?;
        let f = fidelities(&truths, &reconstruct_all(&matched, &test_records)?)?;
        let mut c = Condition::new(&[("shots", s), ("training", "matched".into())], f);
        c.wall_seconds = start.elapsed().as_secs_f64();
        report.conditions.push(c);
    }
    Ok(report)
}
