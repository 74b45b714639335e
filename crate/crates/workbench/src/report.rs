//! Report emission: summary CSV, per-state fidelity CSV, auxiliary tables,
//! a JSON manifest with content hashes, and wall times in `timing.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Result, WbError};
use crate::stats::{summarize, Summary};

/// One experimental condition and its per-state fidelities.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    /// Ordered `(name, value)` pairs; names are shared by every row.
    pub labels: Vec<(String, String)>,
    pub fidelities: Vec<f64>,
    /// PPT classification accuracy where the test set has a known label.
    pub accuracy: Option<f64>,
    pub wall_seconds: f64,
}

impl Condition {
    pub fn new(labels: &[(&str, String)], fidelities: Vec<f64>) -> Self {
        Self {
            labels: labels.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            fidelities,
            accuracy: None,
            wall_seconds: 0.0,
        }
    }

    pub fn summary(&self) -> Summary {
        summarize(&self.fidelities).expect("conditions hold at least one fidelity")
    }

    pub fn label(&self, name: &str) -> Option<&str> {
        self.labels.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn matches(&self, wanted: &[(&str, &str)]) -> bool {
        wanted.iter().all(|(k, v)| self.label(k) == Some(*v))
    }
}

/// Free-form table written next to the main CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub experiment: String,
    pub conditions: Vec<Condition>,
    pub tables: Vec<Table>,
}

impl RunReport {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.into(), ..Self::default() }
    }

    pub fn find(&self, wanted: &[(&str, &str)]) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.matches(wanted))
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn label_names(&self) -> Result<Vec<String>> {
        let first = self
            .conditions
            .first()
            .ok_or_else(|| WbError::Config("report has no conditions".into()))?;
        let names: Vec<String> = first.labels.iter().map(|(k, _)| k.clone()).collect();
        for c in &self.conditions {
            if c.labels.iter().map(|(k, _)| k).ne(names.iter()) {
                return Err(WbError::Config("conditions carry different label sets".into()));
            }
        }
        Ok(names)
    }
}

pub const SUMMARY_COLUMNS: [&str; 9] =
    ["n", "mean_fidelity", "std_fidelity", "min", "q1", "median", "q3", "max", "accuracy"];

/// Written manifest contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub config: RunConfig,
    /// SHA-256 of each emitted CSV, by file name.
    pub files: BTreeMap<String, String>,
    /// SHA-256 over the canonical config JSON followed by the file hashes.
    pub content_hash: String,
}

fn csv_bytes(headers: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| WbError::Io(e.into_error()))
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

/// Writes every file of a report into `dir`; returns the manifest.
pub fn emit_report(report: &RunReport, config: &RunConfig, dir: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let names = report.label_names()?;
    let exp = &report.experiment;
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();

    let mut headers = names.clone();
    headers.extend(SUMMARY_COLUMNS.iter().map(|s| s.to_string()));
    let rows = report.conditions.iter().map(|c| {
        let s = c.summary();
        let mut row: Vec<String> = c.labels.iter().map(|(_, v)| v.clone()).collect();
        row.extend([s.n.to_string(), fmt(s.mean), fmt(s.std), fmt(s.min), fmt(s.q1), fmt(s.median), fmt(s.q3), fmt(s.max)]);
        row.push(c.accuracy.map(fmt).unwrap_or_default());
        row
    });
    files.push((format!("{exp}.csv"), csv_bytes(&headers, rows)?));

    let mut headers = names.clone();
    headers.extend(["index".to_string(), "fidelity".to_string()]);
    let rows = report.conditions.iter().flat_map(|c| {
        c.fidelities.iter().enumerate().map(move |(i, f)| {
            let mut row: Vec<String> = c.labels.iter().map(|(_, v)| v.clone()).collect();
            row.extend([i.to_string(), fmt(*f)]);
            row
        })
    });
    files.push((format!("{exp}_fidelities.csv"), csv_bytes(&headers, rows)?));

    for t in &report.tables {
        files.push((format!("{exp}_{}.csv", t.name), csv_bytes(&t.headers, t.rows.iter().cloned())?));
    }

    let mut hashes = BTreeMap::new();
    for (name, bytes) in &files {
        std::fs::write(dir.join(name), bytes)?;
        hashes.insert(name.clone(), hex::encode(Sha256::digest(bytes)));
    }
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config)?);
    for (name, hash) in &hashes {
        h.update(name.as_bytes());
        h.update(hash.as_bytes());
    }
    let manifest = Manifest {
        experiment: exp.clone(),
        seed: config.seed,
        config: config.clone(),
        files: hashes,
        content_hash: hex::encode(h.finalize()),
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;

    let timing: Vec<_> = report
        .conditions
        .iter()
        .map(|c| {
            let labels: BTreeMap<_, _> = c.labels.iter().cloned().collect();
            serde_json::json!({ "labels": labels, "seconds": c.wall_seconds })
        })
        .collect();
    std::fs::write(dir.join("timing.json"), serde_json::to_vec_pretty(&timing)?)?;
    Ok(manifest)
}

/// Summaries rebuilt from the persisted per-state fidelities, keyed by the
/// label values joined with `/`.
pub fn reaggregate(dir: &Path, experiment: &str) -> Result<BTreeMap<String, Summary>> {
    let mut r = csv::Reader::from_path(dir.join(format!("{experiment}_fidelities.csv")))?;
    let headers = r.headers()?.clone();
    let n_labels = headers.len() - 2;
    let mut lists: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in r.records() {
        let row = row?;
        let key = row.iter().take(n_labels).collect::<Vec<_>>().join("/");
        let f: f64 = row[n_labels + 1]
            .parse()
            .map_err(|e| WbError::Integrity(format!("bad fidelity {:?}: {e}", &row[n_labels + 1])))?;
        lists.entry(key).or_default().push(f);
    }
    Ok(lists.into_iter().map(|(k, v)| (k, summarize(&v).expect("non-empty"))).collect())
}

/// Re-aggregates and compares against the summary CSV. Returns the number of
/// conditions checked.
pub fn verify_report(dir: &Path, experiment: &str) -> Result<usize> {
    let rebuilt = reaggregate(dir, experiment)?;
    let mut r = csv::Reader::from_path(dir.join(format!("{experiment}.csv")))?;
    let headers = r.headers()?.clone();
    let n_labels = headers.len() - 9;
    let mut checked = 0;
    for row in r.records() {
        let row = row?;
        let key = row.iter().take(n_labels).collect::<Vec<_>>().join("/");
        let s = rebuilt
            .get(&key)
            .ok_or_else(|| WbError::Integrity(format!("no fidelities for condition {key}")))?;
        let stored: Vec<f64> = (1..8)
            .map(|i| row[n_labels + i].parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| WbError::Integrity(format!("condition {key}: {e}")))?;
        let recomputed = [s.mean, s.std, s.min, s.q1, s.median, s.q3, s.max];
        let n: usize = row[n_labels].parse().map_err(|_| WbError::Integrity(format!("condition {key}: bad n")))?;
        if n != s.n || stored.iter().zip(recomputed).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(WbError::Integrity(format!("condition {key} does not match its fidelities")));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Reads an emitted report back: conditions with their fidelities and
/// accuracies, plus every auxiliary table listed in the manifest. Wall times
/// are restored from `timing.json` when present.
pub fn load_report(dir: &Path) -> Result<(RunReport, Manifest)> {
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(dir.join("manifest.json"))?)?;
    let exp = manifest.experiment.clone();
    for (name, hash) in &manifest.files {
        let bytes = std::fs::read(dir.join(name))?;
        if hex::encode(Sha256::digest(&bytes)) != *hash {
            return Err(WbError::Integrity(format!("{name} does not match its manifest hash")));
        }
    }

    let mut r = csv::Reader::from_path(dir.join(format!("{exp}.csv")))?;
    let headers = r.headers()?.clone();
    let n_labels = headers.len() - SUMMARY_COLUMNS.len();
    let names: Vec<String> = headers.iter().take(n_labels).map(String::from).collect();
    let mut report = RunReport::new(&exp);
    for row in r.records() {
        let row = row?;
        let acc = &row[headers.len() - 1];
        report.conditions.push(Condition {
            labels: names.iter().cloned().zip(row.iter().take(n_labels).map(String::from)).collect(),
            fidelities: Vec::new(),
            accuracy: if acc.is_empty() {
                None
            } else {
                Some(acc.parse().map_err(|e| WbError::Integrity(format!("bad accuracy {acc:?}: {e}")))?)
            },
            wall_seconds: 0.0,
        });
    }

    let mut r = csv::Reader::from_path(dir.join(format!("{exp}_fidelities.csv")))?;
    for row in r.records() {
        let row = row?;
        let values: Vec<&str> = row.iter().take(n_labels).collect();
        let cond = report
            .conditions
            .iter_mut()
            .find(|c| c.labels.iter().map(|(_, v)| v.as_str()).eq(values.iter().copied()))
            .ok_or_else(|| WbError::Integrity(format!("fidelity row for unknown condition {values:?}")))?;
        let f = &row[n_labels + 1];
        cond.fidelities.push(f.parse().map_err(|e| WbError::Integrity(format!("bad fidelity {f:?}: {e}")))?);
    }
    if let Some(c) = report.conditions.iter().find(|c| c.fidelities.is_empty()) {
        return Err(WbError::Integrity(format!("condition {:?} has no fidelities", c.labels)));
    }

    if let Ok(bytes) = std::fs::read(dir.join("timing.json")) {
        let timing: Vec<serde_json::Value> = serde_json::from_slice(&bytes)?;
        for (c, t) in report.conditions.iter_mut().zip(timing) {
            c.wall_seconds = t["seconds"].as_f64().unwrap_or(0.0);
        }
    }

    let prefix = format!("{exp}_");
    for name in manifest.files.keys() {
        let Some(table) = name.strip_prefix(&prefix).and_then(|n| n.strip_suffix(".csv")) else { continue };
        if table == "fidelities" {
            continue;
        }
        let mut r = csv::Reader::from_path(dir.join(name))?;
        let mut t = Table { name: table.to_string(), headers: r.headers()?.iter().map(String::from).collect(), rows: Vec::new() };
        for row in r.records() {
            t.rows.push(row?.iter().map(String::from).collect());
        }
        report.tables.push(t);
    }
    Ok((report, manifest))
}
