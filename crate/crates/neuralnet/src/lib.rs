//! Convolutional network that maps Pauli-tomography frequencies to the
//! Cholesky parameters of a density matrix.
//!
//! Layers: 2×2 same-padded convolution with ReLU, 2×2 max-pool, two ReLU
//! dense layers each followed by dropout, and a linear output of `4^d` units.

mod checkpoint;
pub mod config;
mod error;
mod grid;
mod inference;
mod network;
mod train;

use ndarray::{LinalgScalar, ScalarOperand};
use qforge_core::Real;

pub use checkpoint::{MAGIC, VERSION};
pub use config::{grid_shape, param_count, NetConfig, Optimizer, TrainConfig};
pub use error::{NnError, Result};
pub use grid::InputGrid;
pub use inference::{ensemble_fidelities, reconstruct_ensemble, TrialAveraging};
pub use network::{dropout_mask, Cache, Dense, DropoutMasks, Network, Params};
pub use train::{loss_mse, mse_and_grad, TrainHistory, TrainingSet};

/// Scalars the network can run on.
pub trait NnReal: Real + LinalgScalar + ScalarOperand {}

impl<T: Real + LinalgScalar + ScalarOperand> NnReal for T {}

pub type Network32 = Network<f32>;
pub type Network64 = Network<f64>;
