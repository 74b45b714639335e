use ndarray::Array2;
use qforge_core::tomography::{PauliSetting, TomographyRecord};

use crate::config::grid_shape;
use crate::error::{NnError, Result};
use crate::NnReal;

/// Tomography frequencies arranged as a single-channel image.
///
/// Each qubit contributes a pair rank `2·basis + outcome` in `0..6`. The
/// row index is the base-6 number formed by the first `⌈d/2⌉` qubits' pair
/// ranks, the column index by the rest, qubit 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct InputGrid<T: NnReal> {
    qubits: usize,
    values: Array2<T>,
}

impl<T: NnReal> InputGrid<T> {
    pub fn from_record(record: &TomographyRecord<T>) -> Self {
        let d = record.qubits();
        let (rows, cols) = grid_shape(d);
        let row_qubits = d.div_ceil(2);
        let mut values = Array2::zeros((rows, cols));
        for (rank, freqs) in record.frequencies().iter().enumerate() {
            let setting = PauliSetting::from_rank(d, rank);
            for (outcome, &f) in freqs.iter().enumerate() {
                let (mut r, mut c) = (0usize, 0usize);
                for (q, basis) in setting.bases().iter().enumerate() {
                    let bit = (outcome >> (d - 1 - q)) & 1;
                    let pair = 2 * basis.index() + bit;
                    if q < row_qubits {
                        r = r * 6 + pair;
                    } else {
                        c = c * 6 + pair;
                    }
                }
                values[[r, c]] = f;
            }
        }
        Self { qubits: d, values }
    }

    pub fn from_array(qubits: usize, values: Array2<T>) -> Result<Self> {
        let (rows, cols) = grid_shape(qubits);
        if values.dim() != (rows, cols) {
            return Err(NnError::Shape { expected: rows * cols, found: values.len() });
        }
        Ok(Self { qubits, values })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    /// Row-major flattening, the layout the network consumes.
    pub fn flat(&self) -> impl Iterator<Item = T> + '_ {
        self.values.iter().copied()
    }
}
