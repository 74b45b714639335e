//! JSON-lines counts files: one state per line,
//! `{"qubits": d, "shots": s, "counts": {"XX": [n00, n01, n10, n11], ...}}`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{PauliSetting, TomographyRecord};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Raw integer counts for one state, keyed by basis label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsLine {
    pub qubits: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, Vec<u64>>,
}

impl CountsLine {
    /// Normalizes each setting by its own total.
    pub fn to_record<T: Real>(&self) -> Result<TomographyRecord<T>> {
        let d = self.qubits;
        let expected = 3usize.pow(d as u32);
        if self.counts.len() != expected {
            return Err(Error::Parse(format!(
                "{d}-qubit counts need {expected} settings, found {}",
                self.counts.len()
            )));
        }
        let mut frequencies = vec![Vec::new(); expected];
        for (label, n) in &self.counts {
            let setting = PauliSetting::parse(label)?;
            if setting.qubits() != d {
                return Err(Error::Parse(format!("label {label:?} does not have {d} qubits")));
            }
            if n.len() != 1 << d {
                return Err(Error::Parse(format!(
                    "setting {label} has {} outcomes, expected {}",
                    n.len(),
                    1 << d
                )));
            }
            let total: u64 = n.iter().sum();
            if total == 0 {
                return Err(Error::Parse(format!("setting {label} has no counts")));
            }
            let inv = T::one() / T::lit(total as f64);
            frequencies[setting.rank()] = n.iter().map(|&k| T::lit(k as f64) * inv).collect();
        }
        TomographyRecord::new(d, self.shots, frequencies, None)
    }

    /// Integer counts recovered from a finite-shot record.
    pub fn from_record<T: Real>(record: &TomographyRecord<T>) -> Result<Self> {
        if record.is_ideal() {
            return Err(Error::Config("ideal records have no integer counts".into()));
        }
        let shots = record.shots() as f64;
        let counts = record
            .frequencies()
            .iter()
            .enumerate()
            .map(|(rank, f)| {
                let label = PauliSetting::from_rank(record.qubits(), rank).label();
                (label, f.iter().map(|x| (x.to_f64() * shots).round() as u64).collect())
            })
            .collect();
        Ok(Self { qubits: record.qubits(), shots: record.shots(), counts })
    }
}

pub fn parse_counts_line<T: Real>(line: &str) -> Result<TomographyRecord<T>> {
    let parsed: CountsLine =
        serde_json::from_str(line).map_err(|e| Error::Parse(format!("counts line: {e}")))?;
    parsed.to_record()
}

/// Reads every non-blank line; errors carry the 1-based line number.
pub fn read_counts_jsonl<T: Real, R: BufRead>(reader: R) -> Result<Vec<TomographyRecord<T>>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_counts_line(&line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

pub fn write_counts_jsonl<T: Real, W: Write>(records: &[TomographyRecord<T>], mut w: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(&CountsLine::from_record(r)?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}
