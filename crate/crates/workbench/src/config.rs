use std::path::PathBuf;

use qforge_core::engineer::BandpassSpec;
use qforge_core::ensembles::EnsembleSpec;
use qforge_core::tomography::NoiseSpec;
use qforge_nn::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WbError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Reduced sizes that fit a single CPU.
    Desk,
    /// Full published sizes.
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    /// Separable counterexamples added to a MEMS-only training set.
    Spurious,
    /// Training distributions crossed with network sizes.
    Distributions,
    /// Ideal versus shot-matched training records.
    Shots,
    /// Mixture size K of the training prior versus purity.
    Heterogeneity,
    /// K, learning-rate and mean-purity sweeps.
    Sweeps,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spurious => "spurious",
            Self::Distributions => "distributions",
            Self::Shots => "shots",
            Self::Heterogeneity => "heterogeneity",
            Self::Sweeps => "sweeps",
        }
    }
}

/// Where the two-qubit NISQ-style test states come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestSource {
    /// Haar targets passed through the depolarizing emulator.
    Emulated { n: usize, noise: NoiseSpec },
    /// Measured counts (JSON lines); ground truths come from MLE tomography
    /// of these counts.
    CountsFile { path: PathBuf },
}

/// One training distribution of the distribution comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Ensemble(EnsembleSpec),
    /// Z ensemble whose mean purity equals the band's lower purity edge.
    ZMinPurity,
    /// Band-passed MA prior.
    Engineered,
}

impl Distribution {
    pub fn label(&self) -> String {
        match self {
            Self::Ensemble(spec) => spec.label(),
            Self::ZMinPurity => "Z(p_min)".into(),
            Self::Engineered => "Engineered".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpuriousParams {
    /// Separable states inside the training set, one condition each.
    pub separable_counts: Vec<usize>,
    /// Also reconstruct an MA(0.1) test set for the purity/concurrence scatter.
    pub scatter: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityCase {
    pub qubits: usize,
    pub alpha: f64,
    pub test_k: usize,
    pub train_ks: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub ks: Vec<usize>,
    pub learning_rates: Vec<f64>,
    pub mean_purities: Vec<f64>,
}

/// Everything an experiment run depends on. Outputs are a function of this
/// value alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub scale: Scale,
    /// Training-set size per condition.
    pub n_train: usize,
    /// Size of synthetic test sets (spurious and heterogeneity runs).
    pub n_test: usize,
    /// `(dense1, dense2)` network widths.
    pub nets: Vec<(usize, usize)>,
    pub train: TrainConfig,
    /// Test shot levels; the first entry is used where only one applies.
    pub shots: Vec<u64>,
    pub test_source: TestSource,
    /// Fixed band; `None` derives it from the test ground truths.
    pub band: Option<BandpassSpec>,
    /// Pure states per MA mixture for the engineered distribution.
    pub engineer_k: usize,
    pub distributions: Vec<Distribution>,
    pub spurious: SpuriousParams,
    pub heterogeneity: Vec<HeterogeneityCase>,
    pub sweeps: SweepParams,
    pub out_dir: PathBuf,
}

const FULL_NETS: [(usize, usize); 15] = [
    (50, 25), (150, 75), (250, 150), (350, 200), (450, 250), (550, 300), (650, 350), (750, 400),
    (850, 450), (950, 550), (1050, 650), (1550, 900), (2050, 1150), (2550, 1400), (3050, 1650),
];

pub const DESK_LEARNING_RATE: f64 = 1e-3;

/// Workhorse network for single-size desk runs.
pub const DESK_NET: (usize, usize) = (1050, 650);

const FULL_N_TRAIN: usize = 30_000;
const FULL_SEPARABLE_STEP: usize = 250;

impl RunConfig {
    pub fn preset(experiment: ExperimentId, scale: Scale, seed: u64) -> Self {
        let full = scale == Scale::Paper;
        let n_train = if full { FULL_N_TRAIN } else { 10_000 };
        let train = TrainConfig {
            epochs: if full { 400 } else { 100 },
            trials: if full { 10 } else { 3 },
            // 0.008 collapses toward mean outputs within a 100-epoch budget
            learning_rate: if full { TrainConfig::default().learning_rate } else { DESK_LEARNING_RATE },
            seed,
            ..TrainConfig::default()
        };
        let nets = match (experiment, full) {
            (ExperimentId::Distributions, true) => FULL_NETS.to_vec(),
            (ExperimentId::Distributions, false) => vec![(250, 150), DESK_NET, (3050, 1650)],
            _ => vec![DESK_NET],
        };
        let shots = match experiment {
            ExperimentId::Shots => vec![128, 256, 512, 1024, 2048, 4096, 8192],
            _ => vec![1024],
        };
        // same separable fractions as 0, 250, ..., 1750 out of 30,000
        let separable_counts = (0..8)
            .map(|i| {
                let frac = (i * FULL_SEPARABLE_STEP) as f64 / FULL_N_TRAIN as f64;
                (frac * n_train as f64).round() as usize
            })
            .collect();
        let heterogeneity = {
            let mut cases = vec![HeterogeneityCase { qubits: 2, alpha: 0.1, test_k: 4, train_ks: vec![4, 5, 6, 7] }];
            if full {
                cases.push(HeterogeneityCase { qubits: 3, alpha: 0.03, test_k: 8, train_ks: vec![8, 9, 10, 11] });
                cases.push(HeterogeneityCase { qubits: 4, alpha: 0.015, test_k: 16, train_ks: vec![16, 19, 22, 25] });
            }
            cases
        };
        Self {
            experiment,
            seed,
            scale,
            n_train,
            n_test: 5_000,
            nets,
            train,
            shots,
            test_source: TestSource::Emulated { n: 500, noise: NoiseSpec::default() },
            band: None,
            engineer_k: 6,
            distributions: vec![
                Distribution::Ensemble(EnsembleSpec::Hs { dim: 4 }),
                Distribution::Ensemble(EnsembleSpec::Bures { dim: 4 }),
                Distribution::Ensemble(EnsembleSpec::HsHaar { dim: 4 }),
                Distribution::Ensemble(EnsembleSpec::Ma { dim: 4, alpha: 0.3394, k: 6 }),
                Distribution::ZMinPurity,
                Distribution::Engineered,
            ],
            spurious: SpuriousParams { separable_counts, scatter: true },
            heterogeneity,
            sweeps: SweepParams {
                ks: (4..=8).collect(),
                learning_rates: vec![0.0008, 0.0015, 0.003, 0.005, 0.008, 0.013, 0.025, 0.05],
                mean_purities: vec![0.45, 0.55, 0.65, 0.75, 0.85],
            },
            out_dir: PathBuf::from("out").join(experiment.name()),
        }
    }

    /// Preset overlaid with the keys present in a JSON object.
    pub fn preset_with_overrides(
        experiment: ExperimentId,
        scale: Scale,
        seed: u64,
        overrides: &serde_json::Value,
    ) -> Result<Self> {
        let mut base = serde_json::to_value(Self::preset(experiment, scale, seed))?;
        merge(&mut base, overrides);
        let cfg: Self = serde_json::from_value(base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(WbError::Config(m));
        self.train.validate()?;
        if self.n_train == 0 || self.n_test == 0 {
            return bad("training and test sizes must be positive".into());
        }
        if self.nets.is_empty() || self.nets.iter().any(|&(a, b)| a == 0 || b == 0) {
            return bad("at least one network with nonzero widths is required".into());
        }
        if self.shots.is_empty() {
            return bad("at least one shot level is required".into());
        }
        if let Some(band) = &self.band {
            band.validate(4)?;
        }
        if let TestSource::Emulated { n, noise } = &self.test_source {
            noise.validate()?;
            if *n == 0 {
                return bad("emulated test set must be non-empty".into());
            }
        }
        if self.engineer_k < 4 {
            return bad(format!("engineer_k = {} is below the dimension 4", self.engineer_k));
        }
        if let Some(&ns) = self.spurious.separable_counts.iter().find(|&&ns| ns > self.n_train) {
            return bad(format!("{ns} separable states exceed the training size {}", self.n_train));
        }
        for case in &self.heterogeneity {
            if !(2..=4).contains(&case.qubits) {
                return bad(format!("heterogeneity on {} qubits is not supported", case.qubits));
            }
        }
        for d in &self.distributions {
            if let Distribution::Ensemble(spec) = d {
                spec.validate()?;
                if spec.dim() != 4 {
                    return bad(format!("{} is not a two-qubit ensemble", spec.label()));
                }
            }
        }
        Ok(())
    }
}

fn merge(base: &mut serde_json::Value, over: &serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}
