use std::time::Instant;

use log::{info, warn};
use qforge_core::engineer::{alpha_for_min_purity, Engineer};
use qforge_core::ensembles::{sample_ensemble, EnsembleSpec};
use qforge_core::Error as CoreError;
use qforge_nn::{NetConfig, TrainConfig};

use super::{draw_distribution, measure, net_label, nisq_ground_truths, resolve_band, seed_for, train_and_score, Dm};
use crate::config::{Distribution, RunConfig};
use crate::error::{Result, WbError};
use crate::report::{Condition, RunReport};
use crate::seeds::condition_rng;

/// K sweep (raw MA(0.3394, K) vs engineered), learning-rate sweep, and
/// pre-filter mean-purity sweep (raw MA vs engineered), all on the NISQ-style
/// test set. Infeasible engineered bands are skipped with a warning.
pub fn exp_sweeps(cfg: &RunConfig) -> Result<RunReport> {
    let truths = nisq_ground_truths(cfg)?;
    let band = resolve_band(cfg, &truths)?;
    let shots = cfg.shots[0];
    let mut rng = condition_rng(cfg.seed, &["nisq-test", "shots", &shots.to_string()]);
    let test_records = measure(&truths, shots, &mut rng)?;
    let size = *cfg.nets.last().expect("validated");
    let net = NetConfig::new(2, size.0, size.1);
    let mut report = RunReport::new("sweeps");

    let mut run = |sweep: &str, dist: &str, value: String, train: &TrainConfig, draw: &mut dyn FnMut(&mut rand_chacha::ChaCha8Rng) -> Result<Vec<Dm>>| -> Result<()> {
        info!("sweeps: {sweep} {dist} {value}");
        let start = Instant::now();
        let mut rng = condition_rng(cfg.seed, &["sweeps", "train", sweep, dist, &value]);
        let states = match draw(&mut rng) {
            Ok(s) => s,
            Err(WbError::Core(CoreError::Infeasible(msg))) => {
                warn!("skipping {sweep} {dist} {value}: {msg}");
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let records = measure(&states, 0, &mut rng)?;
        let seed = seed_for(cfg, &["sweeps", "nets", sweep, dist, &value, &net_label(size)]);
        let (_, _, f) = train_and_score(&states, &records, net, train, seed, &test_records, &truths)?;
        let mut c = Condition::new(&[("sweep", sweep.into()), ("distribution", dist.into()), ("value", value)], f);
        c.wall_seconds = start.elapsed().as_secs_f64();
        report.conditions.push(c);
        Ok(())
    };

    let n = cfg.n_train;
    for &k in &cfg.sweeps.ks {
        let raw = EnsembleSpec::Ma { dim: 4, alpha: 0.3394, k };
        run("k", "MA", k.to_string(), &cfg.train, &mut |r| Ok(sample_ensemble(&raw, n, r)?))?;
        run("k", "Engineered", k.to_string(), &cfg.train, &mut |r| Ok(Engineer::new(band, k).generate(n, r)?))?;
    }
    let lr_dists = [
        Distribution::Ensemble(EnsembleSpec::HsHaar { dim: 4 }),
        Distribution::ZMinPurity,
        Distribution::Ensemble(EnsembleSpec::Ma { dim: 4, alpha: 0.8, k: 4 }),
    ];
    for &lr in &cfg.sweeps.learning_rates {
        let train = TrainConfig { learning_rate: lr, ..cfg.train };
        for dist in &lr_dists {
            run("learning_rate", &dist.label(), lr.to_string(), &train, &mut |r| {
                draw_distribution(dist, &band, cfg.engineer_k, n, r)
            })?;
        }
    }
    for &p in &cfg.sweeps.mean_purities {
        let alpha = alpha_for_min_purity(p, 4)?;
        let raw = EnsembleSpec::Ma { dim: 4, alpha, k: 4 };
        run("mean_purity", "MA", p.to_string(), &cfg.train, &mut |r| Ok(sample_ensemble(&raw, n, r)?))?;
        let eng = Engineer { band, k: 4, alpha_override: Some(alpha) };
        run("mean_purity", "Engineered", p.to_string(), &cfg.train, &mut |r| Ok(eng.generate(n, r)?))?;
    }
    Ok(report)
}
