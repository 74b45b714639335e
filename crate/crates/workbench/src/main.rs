use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use qforge::config::{ExperimentId, RunConfig, Scale};
use qforge::dataset::Dataset;
use qforge::experiments::{fidelities, measure, reconstruct_all, train_trials, training_set};
use qforge::report::{emit_report, load_report, verify_report};
use qforge::seeds::condition_rng;
use qforge::{run_experiment, Result, WbError};
use qforge_core::engineer::{BandpassSpec, Engineer};
use qforge_core::ensembles::{sample_ensemble, EnsembleSpec};
use qforge_core::tomography::{read_counts_jsonl, TomographyRecord};
use qforge_nn::{NetConfig, Network, TrainConfig};

#[derive(Parser)]
#[command(name = "qforge", version, about = "Random-state engineering and neural-network state tomography")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed; every random stream derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file whose keys override the experiment preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "desk")]
    scale: Scale,
    /// Output directory (experiments) or file (other commands).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw states from an ensemble, e.g. '{"kind":"MA","dim":4,"alpha":0.3394,"k":6}'.
    Sample {
        #[arg(long)]
        spec: String,
        #[arg(short, long)]
        n: usize,
    },
    /// Draw band-passed MA states.
    Engineer {
        #[arg(long)]
        p_min: f64,
        #[arg(long)]
        p_max: f64,
        #[arg(long, default_value_t = 0.0)]
        c_min: f64,
        #[arg(long, default_value_t = 1.0)]
        c_max: f64,
        #[arg(long, default_value_t = 6)]
        k: usize,
        #[arg(short, long)]
        n: usize,
    },
    /// Simulate Pauli tomography of a state file (0 shots = ideal).
    Measure {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        shots: u64,
    },
    /// Train networks on a record file whose records carry ground truths.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1050)]
        dense1: usize,
        #[arg(long, default_value_t = 650)]
        dense2: usize,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Reconstruct states from a counts file (.jsonl) or a record file.
    Reconstruct {
        /// One or more checkpoints; predictions are averaged.
        #[arg(long, required = true, num_args = 1..)]
        model: Vec<PathBuf>,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run an experiment and write its report.
    Experiment {
        #[arg(value_enum)]
        id: ExperimentId,
    },
    /// Check a report directory against its persisted fidelities.
    Report {
        dir: PathBuf,
    },
}

fn seed(common: &Common) -> Result<u64> {
    common.seed.ok_or_else(|| WbError::Config("--seed is required for this command".into()))
}

fn out_file(common: &Common, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn load_records(path: &Path) -> Result<Vec<TomographyRecord<f64>>> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        let file = std::fs::File::open(path)?;
        return Ok(read_counts_jsonl(BufReader::new(file))?);
    }
    Ok(Dataset::load(path)?.records().into_iter().cloned().collect())
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match cli.command {
        Command::Sample { spec, n } => {
            let spec: EnsembleSpec = serde_json::from_str(&spec)?;
            let mut rng = condition_rng(seed(common)?, &["sample"]);
            let states = sample_ensemble::<f64, _>(&spec, n, &mut rng)?;
            let out = out_file(common, "states.qfrg");
            Dataset::from_states(states).save(&out)?;
            println!("wrote {n} {} states to {}", spec.label(), out.display());
        }
        Command::Engineer { p_min, p_max, c_min, c_max, k, n } => {
            let band = BandpassSpec::new(p_min, p_max, c_min, c_max);
            let mut rng = condition_rng(seed(common)?, &["engineer"]);
            let states = Engineer::new(band, k).generate::<f64, _>(n, &mut rng)?;
            let out = out_file(common, "engineered.qfrg");
            Dataset::from_states(states).save(&out)?;
            println!("wrote {n} engineered states to {}", out.display());
        }
        Command::Measure { input, shots } => {
            let data = Dataset::load(&input)?;
            let states: Vec<_> = data.states().into_iter().cloned().collect();
            let mut rng = condition_rng(seed(common)?, &["measure", &shots.to_string()]);
            let records = measure(&states, shots, &mut rng)?;
            let with_truth = records.into_iter().zip(states).map(|(r, s)| r.with_ground_truth(s));
            let out = out_file(common, "records.qfrg");
            Dataset::from_records(with_truth).save(&out)?;
            println!("wrote {} records to {}", data.len(), out.display());
        }
        Command::Train { input, dense1, dense2, epochs, learning_rate, trials } => {
            let records: Vec<_> = Dataset::load(&input)?.records().into_iter().cloned().collect();
            let truths = records
                .iter()
                .map(|r| r.ground_truth().cloned())
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| WbError::Config("training records need ground truths".into()))?;
            let qubits = records.first().map(|r| r.qubits()).ok_or_else(|| WbError::Config("empty record file".into()))?;
            let defaults = TrainConfig::default();
            let train = TrainConfig {
                epochs: epochs.unwrap_or(defaults.epochs),
                learning_rate: learning_rate.unwrap_or(defaults.learning_rate),
                trials,
                ..defaults
            };
            let nets = train_trials(&training_set(&truths, &records)?, NetConfig::new(qubits, dense1, dense2), &train, seed(common)?)?;
            let dir = out_file(common, "models");
            std::fs::create_dir_all(&dir)?;
            for (i, net) in nets.iter().enumerate() {
                let path = dir.join(format!("net-{i}.qfnn"));
                net.save(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
                println!("wrote {}", path.display());
            }
        }
        Command::Reconstruct { model, input } => {
            let nets = model
                .iter()
                .map(|p| Ok(Network::<f32>::load(BufReader::new(std::fs::File::open(p)?))?))
                .collect::<Result<Vec<_>>>()?;
            let records = load_records(&input)?;
            let states = reconstruct_all(&nets, &records)?;
            if let Some(truths) = records.iter().map(|r| r.ground_truth().cloned()).collect::<Option<Vec<_>>>() {
                let f = fidelities(&truths, &states)?;
                println!("mean fidelity {:.6} over {} states", f.iter().sum::<f64>() / f.len() as f64, f.len());
            }
            let out = out_file(common, "reconstructed.qfrg");
            Dataset::from_states(states).save(&out)?;
            println!("wrote {} states to {}", records.len(), out.display());
        }
        Command::Experiment { id } => {
            let seed = seed(common)?;
            let overrides = match &common.config {
                Some(path) => serde_json::from_slice(&std::fs::read(path)?)?,
                None => serde_json::json!({}),
            };
            let mut cfg = RunConfig::preset_with_overrides(id, common.scale, seed, &overrides)?;
            if let Some(out) = &common.out {
                cfg.out_dir = out.clone();
            }
            info!("running {} at {:?} scale, seed {seed}", id.name(), common.scale);
            let report = run_experiment(&cfg)?;
            let manifest = emit_report(&report, &cfg, &cfg.out_dir)?;
            println!("{} conditions written to {} (content hash {})", report.conditions.len(), cfg.out_dir.display(), manifest.content_hash);
        }
        Command::Report { dir } => {
            let (report, manifest) = load_report(&dir)?;
            let checked = verify_report(&dir, &manifest.experiment)?;
            println!("{}: {checked} conditions consistent with their fidelity lists", manifest.experiment);
            for c in &report.conditions {
                let s = c.summary();
                let labels: Vec<String> = c.labels.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let acc = c.accuracy.map(|a| format!("  accuracy {a:.3}")).unwrap_or_default();
                println!("  {:<40} mean {:.4}  std {:.4}  median {:.4}{acc}", labels.join(" "), s.mean, s.std, s.median);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
