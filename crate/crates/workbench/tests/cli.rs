use std::path::Path;
use std::process::{Command, Output};

fn qforge(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_qforge"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "qforge {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn pipeline_from_sampling_to_reconstruction() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    qforge(d, &["sample", "--seed", "1", "--spec", r#"{"kind":"HSHaar","dim":4}"#, "-n", "80", "--out", "train.qfrg"]);
    qforge(d, &["engineer", "--seed", "1", "--p-min", "0.5", "--p-max", "0.9", "-n", "20", "--out", "test.qfrg"]);
    qforge(d, &["measure", "--seed", "2", "--input", "train.qfrg", "--out", "train_rec.qfrg"]);
    qforge(d, &["measure", "--seed", "3", "--input", "test.qfrg", "--shots", "512", "--out", "test_rec.qfrg"]);
    qforge(d, &[
        "train", "--seed", "4", "--input", "train_rec.qfrg", "--dense1", "16", "--dense2", "8",
        "--epochs", "2", "--trials", "2", "--out", "models",
    ]);
    let out = qforge(d, &[
        "reconstruct", "--model", "models/net-0.qfnn", "models/net-1.qfnn", "--input", "test_rec.qfrg",
        "--out", "rec.qfrg",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mean fidelity"), "{text}");
    let rec = qforge::dataset::Dataset::load(d.join("rec.qfrg")).unwrap();
    assert_eq!(rec.states().len(), 20);
    for rho in rec.states() {
        rho.check().unwrap();
    }
}

#[test]
fn experiment_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = r#"{"n_train": 40, "n_test": 30, "nets": [[12, 8]],
        "train": {"epochs": 1, "trials": 1},
        "test_source": {"n": 20},
        "spurious": {"separable_counts": [0, 10], "scatter": false}}"#;
    std::fs::write(d.join("cfg.json"), cfg).unwrap();
    qforge(d, &["experiment", "spurious", "--seed", "8", "--config", "cfg.json", "--out", "rep"]);
    let out = qforge(d, &["report", "rep"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("4 conditions consistent"), "{text}");
}

#[test]
fn missing_seed_and_bad_input_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_qforge")).current_dir(tmp.path()).args(args).output().unwrap();
    let out = run(&["sample", "--spec", r#"{"kind":"HS","dim":4}"#, "-n", "3"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    std::fs::write(tmp.path().join("junk.qfrg"), b"not a dataset").unwrap();
    assert!(!run(&["measure", "--seed", "1", "--input", "junk.qfrg"]).status.success());
    assert!(!run(&["report", "nowhere"]).status.success());
}
