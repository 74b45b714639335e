//! Experiment drivers. Networks train in f32; every metric is computed in f64.

mod distributions;
mod heterogeneity;
mod shots;
mod spurious;
mod sweeps;

use std::io::BufReader;
use std::time::Instant;

use log::{info, warn};
use ndarray::Array2;
use qforge_core::engineer::{BandpassSpec, Engineer};
use qforge_core::ensembles::{sample_ensemble, z_beta_for_mean_purity, EnsembleSpec};
use qforge_core::qcore::{concurrence, fidelity, purity, tau_decode, tau_encode, DensityMatrix, TauVector};
use qforge_core::tomography::{
    build_nisq_test_set, ideal_probabilities, linear_inversion, mle_project, read_counts_jsonl,
    sample_counts, TomographyRecord,
};
use qforge_core::Error as CoreError;
use qforge_nn::{InputGrid, NetConfig, Network, TrainConfig, TrainingSet};
use rand::Rng;

pub use distributions::exp_distributions;
pub use heterogeneity::{exp_heterogeneity, purity_bins, PURITY_BINS};
pub use shots::exp_shots;
pub use spurious::exp_spurious;
pub use sweeps::exp_sweeps;

use crate::config::{Distribution, ExperimentId, RunConfig, TestSource};
use crate::error::{Result, WbError};
use crate::report::RunReport;
use crate::seeds::{condition_rng, derive_seed};

pub type Dm = DensityMatrix<f64>;

/// Dispatches on `cfg.experiment`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentId::Spurious => exp_spurious(cfg),
        ExperimentId::Distributions => exp_distributions(cfg),
        ExperimentId::Shots => exp_shots(cfg),
        ExperimentId::Heterogeneity => exp_heterogeneity(cfg),
        ExperimentId::Sweeps => exp_sweeps(cfg),
    }
}

/// Ideal (`shots == 0`) or sampled records for each state.
pub fn measure<R: Rng + ?Sized>(states: &[Dm], shots: u64, rng: &mut R) -> Result<Vec<TomographyRecord<f64>>> {
    states
        .iter()
        .map(|rho| {
            let qubits = rho.qubits().ok_or_else(|| WbError::Config("state is not a qubit register".into()))?;
            let ideal = ideal_probabilities(rho, qubits)?;
            Ok(if shots == 0 { ideal } else { sample_counts(&ideal, shots, rng)? })
        })
        .collect()
}

fn input_rows(records: &[TomographyRecord<f64>]) -> Result<Array2<f32>> {
    let first = records.first().ok_or_else(|| WbError::Config("no records".into()))?;
    let width = 6usize.pow(first.qubits() as u32);
    let mut data = Vec::with_capacity(records.len() * width);
    for r in records {
        if r.qubits() != first.qubits() {
            return Err(WbError::Config("records mix register sizes".into()));
        }
        data.extend(InputGrid::from_record(r).flat().map(|x| x as f32));
    }
    Ok(Array2::from_shape_vec((records.len(), width), data).expect("sizes checked"))
}

/// Network inputs from `records`, targets from the τ-encoding of `states`.
pub fn training_set(states: &[Dm], records: &[TomographyRecord<f64>]) -> Result<TrainingSet<f32>> {
    let inputs = input_rows(records)?;
    let targets: Vec<f32> = states.iter().flat_map(|s| tau_encode(s).into_vec()).map(|x| x as f32).collect();
    let out_len = targets.len() / states.len().max(1);
    let targets = Array2::from_shape_vec((states.len(), out_len), targets).expect("equal τ lengths");
    Ok(TrainingSet::new(inputs, targets)?)
}

/// `cfg.trials` networks, each with its own seed derived from `seed`.
pub fn train_trials(
    set: &TrainingSet<f32>,
    net: NetConfig,
    train: &TrainConfig,
    seed: u64,
) -> Result<Vec<Network<f32>>> {
    (0..train.trials)
        .map(|t| {
            let mut rng = condition_rng(seed, &["trial", &t.to_string()]);
            let mut model = Network::new(net, &mut rng)?;
            let start = Instant::now();
            let history = model.train(set, train, &mut rng)?;
            info!(
                "trial {t}: {} epochs, final loss {:.4e}, {:.1}s",
                train.epochs,
                history.last().unwrap_or(f64::NAN),
                start.elapsed().as_secs_f64()
            );
            Ok(model)
        })
        .collect()
}

/// Trial-averaged reconstructions (entrywise mean of density matrices).
pub fn reconstruct_all(nets: &[Network<f32>], records: &[TomographyRecord<f64>]) -> Result<Vec<Dm>> {
    let x = input_rows(records)?;
    let qubits = records[0].qubits();
    let per_net: Vec<Vec<Dm>> = nets
        .iter()
        .map(|net| {
            let y = net.predict(x.view());
            y.rows()
                .into_iter()
                .map(|row| decode_or_mixed(qubits, row.iter().map(|&v| v as f64).collect()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    (0..records.len())
        .map(|i| {
            let states: Vec<Dm> = per_net.iter().map(|v| v[i].clone()).collect();
            Ok(DensityMatrix::average(&states)?)
        })
        .collect()
}

/// An all-zero output has no state; it counts as the maximally mixed guess.
fn decode_or_mixed(qubits: usize, values: Vec<f64>) -> Result<Dm> {
    match tau_decode(&TauVector::new(qubits, values)?) {
        Ok(rho) => Ok(rho),
        Err(CoreError::DegenerateInput(_)) => {
            warn!("network produced an all-zero output; using the maximally mixed state");
            Ok(DensityMatrix::maximally_mixed(1 << qubits))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn fidelities(truths: &[Dm], predictions: &[Dm]) -> Result<Vec<f64>> {
    truths.iter().zip(predictions).map(|(a, b)| Ok(fidelity(a, b)?)).collect()
}

/// Two-qubit test ground truths from the configured source.
pub fn nisq_ground_truths(cfg: &RunConfig) -> Result<Vec<Dm>> {
    match &cfg.test_source {
        TestSource::Emulated { n, noise } => {
            let mut rng = condition_rng(cfg.seed, &["nisq-test"]);
            Ok(build_nisq_test_set::<f64, _>(*n, 2, 0, noise, &mut rng)?
                .into_iter()
                .map(|s| s.ground_truth)
                .collect())
        }
        TestSource::CountsFile { path } => {
            let file = std::fs::File::open(path)?;
            let records = read_counts_jsonl::<f64, _>(BufReader::new(file))?;
            if records.iter().any(|r| r.qubits() != 2) {
                return Err(WbError::Config("test counts must be two-qubit".into()));
            }
            records.iter().map(|r| Ok(mle_project(&linear_inversion(r))?)).collect()
        }
    }
}

/// Smallest closed band containing every state.
pub fn band_of(states: &[Dm]) -> Result<BandpassSpec> {
    let mut band = BandpassSpec::new(1.0, 0.0, 1.0, 0.0);
    for rho in states {
        let p = purity(rho);
        let c = concurrence(rho)?;
        band.p_min = band.p_min.min(p);
        band.p_max = band.p_max.max(p);
        band.c_min = band.c_min.min(c);
        band.c_max = band.c_max.max(c);
    }
    band.p_max = band.p_max.min(1.0);
    band.c_min = band.c_min.max(0.0);
    Ok(band)
}

pub fn resolve_band(cfg: &RunConfig, truths: &[Dm]) -> Result<BandpassSpec> {
    match cfg.band {
        Some(b) => Ok(b),
        None => {
            let b = band_of(truths)?;
            info!(
                "band from test set: purity [{:.3}, {:.3}], concurrence [{:.3}, {:.3}]",
                b.p_min, b.p_max, b.c_min, b.c_max
            );
            Ok(b)
        }
    }
}

/// Training states for one distribution.
pub fn draw_distribution<R: Rng + ?Sized>(
    dist: &Distribution,
    band: &BandpassSpec,
    engineer_k: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Dm>> {
    match dist {
        Distribution::Ensemble(spec) => Ok(sample_ensemble(spec, n, rng)?),
        Distribution::ZMinPurity => {
            let beta = z_beta_for_mean_purity(band.p_min, 4)?;
            Ok(sample_ensemble(&EnsembleSpec::Z { dim: 4, beta }, n, rng)?)
        }
        Distribution::Engineered => Ok(Engineer::new(*band, engineer_k).generate(n, rng)?),
    }
}

/// Trained nets, their reconstructions of the test records, and fidelities.
pub type Scored = (Vec<Network<f32>>, Vec<Dm>, Vec<f64>);

/// Trains trial networks on ideal records of `states` and scores them on
/// `(records, truths)`.
pub fn train_and_score(
    states: &[Dm],
    train_records: &[TomographyRecord<f64>],
    net: NetConfig,
    cfg: &TrainConfig,
    seed: u64,
    test_records: &[TomographyRecord<f64>],
    truths: &[Dm],
) -> Result<Scored> {
    let set = training_set(states, train_records)?;
    let nets = train_trials(&set, net, cfg, seed)?;
    let predictions = reconstruct_all(&nets, test_records)?;
    let f = fidelities(truths, &predictions)?;
    Ok((nets, predictions, f))
}

pub(crate) fn net_label((d1, d2): (usize, usize)) -> String {
    format!("{d1}x{d2}")
}

pub(crate) fn seed_for(cfg: &RunConfig, labels: &[&str]) -> u64 {
    derive_seed(cfg.seed, labels)
}
