use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::grid::InputGrid;
use crate::network::Network;
use crate::NnReal;
use qforge_core::qcore::{fidelity, tau_decode, DensityMatrix, TauVector};
use qforge_core::tomography::TomographyRecord;

/// How predictions from independently trained networks are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialAveraging {
    /// Entrywise mean of the decoded density matrices, trace renormalized.
    #[default]
    DensityMatrix,
    /// Mean τ-vector, decoded once.
    Tau,
    /// Mean of per-network fidelities; no combined state exists.
    Fidelity,
}

fn stack_inputs<T: NnReal>(net: &Network<T>, records: &[TomographyRecord<T>]) -> Result<Array2<T>> {
    let mut data = Vec::with_capacity(records.len() * net.input_len());
    for r in records {
        if r.qubits() != net.config().qubits {
            return Err(NnError::Shape { expected: net.config().qubits, found: r.qubits() });
        }
        data.extend(InputGrid::from_record(r).flat());
    }
    Ok(Array2::from_shape_vec((records.len(), net.input_len()), data).expect("sizes checked"))
}

impl<T: NnReal> Network<T> {
    pub fn predict_tau(&self, records: &[TomographyRecord<T>]) -> Result<Vec<TauVector<T>>> {
        let x = stack_inputs(self, records)?;
        let y = self.predict(x.view());
        y.rows()
            .into_iter()
            .map(|row| Ok(TauVector::new(self.config().qubits, row.to_vec())?))
            .collect()
    }

    /// Network prediction decoded into a state.
    pub fn reconstruct(&self, record: &TomographyRecord<T>) -> Result<DensityMatrix<T>> {
        Ok(self.reconstruct_batch(std::slice::from_ref(record))?.remove(0))
    }

    pub fn reconstruct_batch(&self, records: &[TomographyRecord<T>]) -> Result<Vec<DensityMatrix<T>>> {
        self.predict_tau(records)?
            .iter()
            .map(|t| Ok(tau_decode(t)?))
            .collect()
    }
}

/// Combined state per record for [`TrialAveraging::DensityMatrix`] or
/// [`TrialAveraging::Tau`].
pub fn reconstruct_ensemble<T: NnReal>(
    nets: &[Network<T>],
    records: &[TomographyRecord<T>],
    mode: TrialAveraging,
) -> Result<Vec<DensityMatrix<T>>> {
    if nets.is_empty() {
        return Err(NnError::Config("no networks to average".into()));
    }
    match mode {
        TrialAveraging::DensityMatrix => {
            let per_net: Vec<Vec<DensityMatrix<T>>> =
                nets.iter().map(|n| n.reconstruct_batch(records)).collect::<Result<_>>()?;
            (0..records.len())
                .map(|i| {
                    let states: Vec<_> = per_net.iter().map(|v| v[i].clone()).collect();
                    Ok(DensityMatrix::average(&states)?)
                })
                .collect()
        }
        TrialAveraging::Tau => {
            let per_net: Vec<Vec<TauVector<T>>> =
                nets.iter().map(|n| n.predict_tau(records)).collect::<Result<_>>()?;
            let inv = T::one() / T::lit_usize(nets.len());
            (0..records.len())
                .map(|i| {
                    let mut acc = vec![T::zero(); per_net[0][i].len()];
                    for v in &per_net {
                        for (a, &x) in acc.iter_mut().zip(v[i].as_slice()) {
                            *a += x * inv;
                        }
                    }
                    Ok(tau_decode(&TauVector::new(nets[0].config().qubits, acc)?)?)
                })
                .collect()
        }
        TrialAveraging::Fidelity => Err(NnError::Config(
            "fidelity averaging yields no combined state; use ensemble_fidelities".into(),
        )),
    }
}

/// Per-record fidelity to the ground truths under any averaging mode.
pub fn ensemble_fidelities<T: NnReal>(
    nets: &[Network<T>],
    records: &[TomographyRecord<T>],
    truths: &[DensityMatrix<T>],
    mode: TrialAveraging,
) -> Result<Vec<T>> {
    if truths.len() != records.len() {
        return Err(NnError::Shape { expected: records.len(), found: truths.len() });
    }
    match mode {
        TrialAveraging::Fidelity => {
            if nets.is_empty() {
                return Err(NnError::Config("no networks to average".into()));
            }
            let mut acc = vec![T::zero(); records.len()];
            for n in nets {
                for (a, (rho, truth)) in acc.iter_mut().zip(n.reconstruct_batch(records)?.iter().zip(truths)) {
                    *a += fidelity(truth, rho)?;
                }
            }
            let inv = T::one() / T::lit_usize(nets.len());
            Ok(acc.into_iter().map(|a| a * inv).collect())
        }
        _ => reconstruct_ensemble(nets, records, mode)?
            .iter()
            .zip(truths)
            .map(|(rho, truth)| Ok(fidelity(truth, rho)?))
            .collect(),
    }
}
