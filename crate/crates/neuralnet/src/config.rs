use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};

/// Side of the square convolution kernel.
pub const KERNEL: usize = 2;
/// Pooling window and stride.
pub const POOL: usize = 2;

fn default_filters() -> usize {
    25
}

fn default_dropout() -> f64 {
    0.5
}

/// Network shape. The conv layer uses same padding (extra row/column on the
/// bottom/right), the pool valid padding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub qubits: usize,
    pub dense1: usize,
    pub dense2: usize,
    #[serde(default = "default_filters")]
    pub conv_filters: usize,
    #[serde(default = "default_dropout")]
    pub dropout_rate: f64,
}

impl NetConfig {
    pub fn new(qubits: usize, dense1: usize, dense2: usize) -> Self {
        Self {
            qubits,
            dense1,
            dense2,
            conv_filters: default_filters(),
            dropout_rate: default_dropout(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits == 0 || self.qubits > 4 {
            return Err(NnError::Config(format!("qubit count {} outside 1..=4", self.qubits)));
        }
        if self.dense1 == 0 || self.dense2 == 0 || self.conv_filters == 0 {
            return Err(NnError::Config("layer widths must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(NnError::Config(format!("dropout rate {} outside [0, 1)", self.dropout_rate)));
        }
        let (h, w) = self.grid_shape();
        if h < POOL || w < POOL {
            return Err(NnError::Config(format!("{h}x{w} input is smaller than the pool window")));
        }
        Ok(())
    }

    /// `(6^⌈d/2⌉, 6^⌊d/2⌋)`.
    pub fn grid_shape(&self) -> (usize, usize) {
        grid_shape(self.qubits)
    }

    pub fn pooled_shape(&self) -> (usize, usize) {
        let (h, w) = self.grid_shape();
        (h / POOL, w / POOL)
    }

    pub fn flat_len(&self) -> usize {
        let (h, w) = self.pooled_shape();
        h * w * self.conv_filters
    }

    pub fn output_len(&self) -> usize {
        1 << (2 * self.qubits)
    }

    pub fn param_count(&self) -> usize {
        param_count(self)
    }
}

pub fn grid_shape(qubits: usize) -> (usize, usize) {
    let rows = 6usize.pow(qubits.div_ceil(2) as u32);
    let cols = 6usize.pow((qubits / 2) as u32);
    (rows, cols)
}

/// Trainable parameter count: conv kernel and bias plus three dense layers.
pub fn param_count(cfg: &NetConfig) -> usize {
    let conv = KERNEL * KERNEL * cfg.conv_filters + cfg.conv_filters;
    let d1 = (cfg.flat_len() + 1) * cfg.dense1;
    let d2 = (cfg.dense1 + 1) * cfg.dense2;
    let d3 = (cfg.dense2 + 1) * cfg.output_len();
    conv + d1 + d2 + d3
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimizer {
    Adam { beta1: f64, beta2: f64, eps: f64 },
    Sgd,
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

fn default_lr() -> f64 {
    0.008
}
fn default_epochs() -> usize {
    400
}
fn default_batch() -> usize {
    128
}
fn default_trials() -> usize {
    10
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default)]
    pub optimizer: Optimizer,
    #[serde(default)]
    pub seed: u64,
    /// Independently seeded networks trained per condition.
    #[serde(default = "default_trials")]
    pub trials: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: default_lr(),
            epochs: default_epochs(),
            batch_size: default_batch(),
            optimizer: Optimizer::default(),
            seed: 0,
            trials: default_trials(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NnError::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.trials == 0 {
            return Err(NnError::Config("epochs, batch size and trials must be at least 1".into()));
        }
        Ok(())
    }
}
