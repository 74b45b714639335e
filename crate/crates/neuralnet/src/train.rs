use log::debug;
use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::{Optimizer, TrainConfig};
use crate::error::{NnError, Result};
use crate::grid::InputGrid;
use crate::network::{DropoutMasks, Network, Params};
use crate::NnReal;
use qforge_core::qcore::TauVector;

/// Inputs and targets stacked row-wise.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet<T: NnReal> {
    pub inputs: Array2<T>,
    pub targets: Array2<T>,
}

impl<T: NnReal> TrainingSet<T> {
    pub fn new(inputs: Array2<T>, targets: Array2<T>) -> Result<Self> {
        if inputs.nrows() != targets.nrows() {
            return Err(NnError::Shape { expected: inputs.nrows(), found: targets.nrows() });
        }
        Ok(Self { inputs, targets })
    }

    pub fn from_pairs(pairs: &[(InputGrid<T>, TauVector<T>)]) -> Result<Self> {
        let first = pairs.first().ok_or(NnError::EmptyDataset)?;
        let in_len = first.0.values().len();
        let out_len = first.1.len();
        let mut inputs = Vec::with_capacity(pairs.len() * in_len);
        let mut targets = Vec::with_capacity(pairs.len() * out_len);
        for (grid, tau) in pairs {
            if grid.values().len() != in_len || tau.len() != out_len {
                return Err(NnError::Shape { expected: in_len, found: grid.values().len() });
            }
            inputs.extend(grid.flat());
            targets.extend_from_slice(tau.as_slice());
        }
        let n = pairs.len();
        Ok(Self {
            inputs: Array2::from_shape_vec((n, in_len), inputs).expect("sizes checked"),
            targets: Array2::from_shape_vec((n, out_len), targets).expect("sizes checked"),
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Mean of squared differences over every component.
pub fn loss_mse<T: NnReal>(pred: &TauVector<T>, target: &TauVector<T>) -> Result<T> {
    if pred.len() != target.len() {
        return Err(NnError::Shape { expected: target.len(), found: pred.len() });
    }
    let sum = pred
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
    Ok(sum / T::lit_usize(pred.len()))
}

/// Batch MSE and its gradient with respect to the outputs.
pub fn mse_and_grad<T: NnReal>(output: &Array2<T>, target: ArrayView2<T>) -> (T, Array2<T>) {
    let diff = output - &target;
    let n = T::lit_usize(diff.len());
    let loss = diff.iter().fold(T::zero(), |acc, &d| acc + d * d) / n;
    let grad = diff.mapv(|d| d * T::lit(2.0) / n);
    (loss, grad)
}

/// Per-epoch mean training loss (dropout active).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainHistory {
    pub epoch_loss: Vec<f64>,
}

impl TrainHistory {
    pub fn last(&self) -> Option<f64> {
        self.epoch_loss.last().copied()
    }
}

struct OptimizerState<T: NnReal> {
    kind: Optimizer,
    lr: f64,
    step: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: NnReal> OptimizerState<T> {
    fn new(kind: Optimizer, lr: f64, params: &Params<T>) -> Self {
        let zeros = || params.blocks().iter().map(|b| vec![T::zero(); b.len()]).collect();
        let adam = matches!(kind, Optimizer::Adam { .. });
        Self {
            kind,
            lr,
            step: 0,
            m: if adam { zeros() } else { Vec::new() },
            v: if adam { zeros() } else { Vec::new() },
        }
    }

    fn apply(&mut self, params: &mut Params<T>, grads: &Params<T>) {
        self.step += 1;
        match self.kind {
            Optimizer::Sgd => {
                let lr = T::lit(self.lr);
                for (p, g) in params.blocks_mut().into_iter().zip(grads.blocks()) {
                    for (pi, &gi) in p.iter_mut().zip(g) {
                        *pi -= lr * gi;
                    }
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let t = self.step;
                let lr_t = self.lr * (1.0 - beta2.powi(t)).sqrt() / (1.0 - beta1.powi(t));
                let (b1, b2) = (T::lit(beta1), T::lit(beta2));
                let (c1, c2) = (T::one() - b1, T::one() - b2);
                let (lr_t, eps) = (T::lit(lr_t), T::lit(eps));
                let blocks = params.blocks_mut().into_iter().zip(grads.blocks());
                for ((p, g), (m, v)) in blocks.zip(self.m.iter_mut().zip(self.v.iter_mut())) {
                    let state = m.iter_mut().zip(v.iter_mut());
                    for ((pi, &gi), (mi, vi)) in p.iter_mut().zip(g).zip(state) {
                        *mi = b1 * *mi + c1 * gi;
                        *vi = b2 * *vi + c2 * gi * gi;
                        *pi -= lr_t * *mi / (vi.sqrt() + eps);
                    }
                }
            }
        }
    }
}

impl<T: NnReal> Network<T> {
    /// Mini-batch training with per-epoch shuffling; returns the loss history.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        data: &TrainingSet<T>,
        cfg: &TrainConfig,
        rng: &mut R,
    ) -> Result<TrainHistory> {
        cfg.validate()?;
        if data.is_empty() {
            return Err(NnError::EmptyDataset);
        }
        if data.inputs.ncols() != self.input_len() || data.targets.ncols() != self.config().output_len() {
            return Err(NnError::Shape { expected: self.input_len(), found: data.inputs.ncols() });
        }
        let mut opt = OptimizerState::new(cfg.optimizer, cfg.learning_rate, &self.params);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut history = TrainHistory::default();
        for epoch in 1..=cfg.epochs {
            order.shuffle(rng);
            let mut total = 0.0;
            for chunk in order.chunks(cfg.batch_size) {
                let x = data.inputs.select(Axis(0), chunk);
                let y = data.targets.select(Axis(0), chunk);
                let masks = DropoutMasks::sample(self.config(), chunk.len(), rng);
                let cache = self.forward_batch(x.view(), Some(masks));
                let (loss, d_out) = mse_and_grad(&cache.output, y.view());
                let loss = loss.to_f64();
                if !loss.is_finite() {
                    return Err(NnError::Diverged { epoch, loss });
                }
                total += loss * chunk.len() as f64;
                let grads = self.backward(&cache, &d_out);
                opt.apply(&mut self.params, &grads);
            }
            let mean = total / data.len() as f64;
            debug!("epoch {epoch}: loss {mean:.6}");
            history.epoch_loss.push(mean);
        }
        Ok(history)
    }

    /// Inference-mode MSE over a whole set.
    pub fn evaluate_loss(&self, data: &TrainingSet<T>) -> f64 {
        let pred = self.predict(data.inputs.view());
        mse_and_grad(&pred, data.targets.view()).0.to_f64()
    }
}
