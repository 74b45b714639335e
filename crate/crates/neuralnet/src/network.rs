use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::config::{NetConfig, KERNEL, POOL};
use crate::error::{NnError, Result};
use crate::grid::InputGrid;
use crate::NnReal;
use qforge_core::qcore::TauVector;

#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T: NnReal> {
    /// `(inputs, outputs)`.
    pub w: Array2<T>,
    pub b: Array1<T>,
}

impl<T: NnReal> Dense<T> {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { w: Array2::zeros((inputs, outputs)), b: Array1::zeros(outputs) }
    }

    fn uniform<R: Rng + ?Sized>(inputs: usize, outputs: usize, limit: f64, rng: &mut R) -> Self {
        let w = Array2::from_shape_simple_fn((inputs, outputs), || T::lit(rng.random_range(-limit..=limit)));
        Self { w, b: Array1::zeros(outputs) }
    }
}

/// All trainable tensors; gradients share the same layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Params<T: NnReal> {
    /// `(kernel cells, filters)`, cells in row-major kernel order.
    pub conv_w: Array2<T>,
    pub conv_b: Array1<T>,
    pub dense: [Dense<T>; 3],
}

impl<T: NnReal> Params<T> {
    pub fn zeros(cfg: &NetConfig) -> Self {
        Self {
            conv_w: Array2::zeros((KERNEL * KERNEL, cfg.conv_filters)),
            conv_b: Array1::zeros(cfg.conv_filters),
            dense: [
                Dense::zeros(cfg.flat_len(), cfg.dense1),
                Dense::zeros(cfg.dense1, cfg.dense2),
                Dense::zeros(cfg.dense2, cfg.output_len()),
            ],
        }
    }

    /// He-uniform for the ReLU layers, Glorot-uniform for the linear output,
    /// zero biases.
    pub fn init<R: Rng + ?Sized>(cfg: &NetConfig, rng: &mut R) -> Self {
        let he = |fan_in: usize| (6.0 / fan_in as f64).sqrt();
        let cells = KERNEL * KERNEL;
        let conv = Dense::uniform(cells, cfg.conv_filters, he(cells), rng);
        let glorot = (6.0 / (cfg.dense2 + cfg.output_len()) as f64).sqrt();
        Self {
            conv_w: conv.w,
            conv_b: conv.b,
            dense: [
                Dense::uniform(cfg.flat_len(), cfg.dense1, he(cfg.flat_len()), rng),
                Dense::uniform(cfg.dense1, cfg.dense2, he(cfg.dense1), rng),
                Dense::uniform(cfg.dense2, cfg.output_len(), glorot, rng),
            ],
        }
    }

    /// Blocks in checkpoint order.
    pub fn blocks(&self) -> [&[T]; 8] {
        let sl = contiguous::<T>;
        [
            sl(self.conv_w.as_slice()),
            sl(self.conv_b.as_slice()),
            sl(self.dense[0].w.as_slice()),
            sl(self.dense[0].b.as_slice()),
            sl(self.dense[1].w.as_slice()),
            sl(self.dense[1].b.as_slice()),
            sl(self.dense[2].w.as_slice()),
            sl(self.dense[2].b.as_slice()),
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut [T]; 8] {
        let [d0, d1, d2] = &mut self.dense;
        let sl = contiguous_mut::<T>;
        [
            sl(self.conv_w.as_slice_mut()),
            sl(self.conv_b.as_slice_mut()),
            sl(d0.w.as_slice_mut()),
            sl(d0.b.as_slice_mut()),
            sl(d1.w.as_slice_mut()),
            sl(d1.b.as_slice_mut()),
            sl(d2.w.as_slice_mut()),
            sl(d2.b.as_slice_mut()),
        ]
    }

    pub fn len(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.blocks().concat()
    }

    pub fn set_flat(&mut self, values: &[T]) -> Result<()> {
        if values.len() != self.len() {
            return Err(NnError::Shape { expected: self.len(), found: values.len() });
        }
        let mut offset = 0;
        for block in self.blocks_mut() {
            block.copy_from_slice(&values[offset..offset + block.len()]);
            offset += block.len();
        }
        Ok(())
    }
}

/// Inverted-dropout multipliers (0 or `1/(1-rate)`) for the two hidden
/// layers of one batch.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutMasks<T: NnReal> {
    pub hidden1: Array2<T>,
    pub hidden2: Array2<T>,
}

impl<T: NnReal> DropoutMasks<T> {
    pub fn sample<R: Rng + ?Sized>(cfg: &NetConfig, batch: usize, rng: &mut R) -> Self {
        Self {
            hidden1: dropout_mask(batch, cfg.dense1, cfg.dropout_rate, rng),
            hidden2: dropout_mask(batch, cfg.dense2, cfg.dropout_rate, rng),
        }
    }
}

pub fn dropout_mask<T: NnReal, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rate: f64,
    rng: &mut R,
) -> Array2<T> {
    if rate == 0.0 {
        return Array2::from_elem((rows, cols), T::one());
    }
    let scale = T::lit(1.0 / (1.0 - rate));
    // compare 32-bit draws against the keep threshold
    let threshold = ((1.0 - rate) * 4_294_967_296.0) as u64;
    Array2::from_shape_simple_fn((rows, cols), || {
        if (rng.random::<u32>() as u64) < threshold {
            scale
        } else {
            T::zero()
        }
    })
}

/// Intermediate activations kept for the backward pass.
pub struct Cache<T: NnReal> {
    patches: Array2<T>,
    conv_pre: Array2<T>,
    /// For every pooled value (in flattened order), the index of its source
    /// in the row-major conv activation buffer.
    pool_src: Vec<usize>,
    flat: Array2<T>,
    z1: Array2<T>,
    h1: Array2<T>,
    z2: Array2<T>,
    h2: Array2<T>,
    pub output: Array2<T>,
    masks: Option<DropoutMasks<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network<T: NnReal> {
    cfg: NetConfig,
    pub params: Params<T>,
}

fn relu<T: NnReal>(a: &mut Array2<T>) {
    a.mapv_inplace(|x| if x > T::zero() { x } else { T::zero() });
}

fn relu_backward<T: NnReal>(grad: &mut Array2<T>, pre: &Array2<T>) {
    Zip::from(grad).and(pre).for_each(|g, &z| {
        if z <= T::zero() {
            *g = T::zero();
        }
    });
}

fn affine<T: NnReal>(x: &Array2<T>, layer: &Dense<T>) -> Array2<T> {
    let mut z = x.dot(&layer.w);
    z += &layer.b;
    z
}

impl<T: NnReal> Network<T> {
    pub fn new<R: Rng + ?Sized>(cfg: NetConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, params: Params::init(&cfg, rng) })
    }

    pub fn from_params(cfg: NetConfig, params: Params<T>) -> Result<Self> {
        cfg.validate()?;
        let expected = Params::<T>::zeros(&cfg);
        for (a, b) in expected.blocks().iter().zip(params.blocks()) {
            if a.len() != b.len() {
                return Err(NnError::Shape { expected: a.len(), found: b.len() });
            }
        }
        Ok(Self { cfg, params })
    }

    pub fn config(&self) -> &NetConfig {
        &self.cfg
    }

    pub fn input_len(&self) -> usize {
        let (h, w) = self.cfg.grid_shape();
        h * w
    }

    /// `(batch·H·W, 4)` patch matrix; cells past the bottom/right edge are 0.
    fn im2col(&self, x: ArrayView2<T>) -> Array2<T> {
        let (h, w) = self.cfg.grid_shape();
        let batch = x.nrows();
        let mut p = Array2::zeros((batch * h * w, KERNEL * KERNEL));
        for b in 0..batch {
            let row = x.row(b);
            for i in 0..h {
                for j in 0..w {
                    let r = (b * h + i) * w + j;
                    for di in 0..KERNEL {
                        for dj in 0..KERNEL {
                            if i + di < h && j + dj < w {
                                p[[r, di * KERNEL + dj]] = row[(i + di) * w + j + dj];
                            }
                        }
                    }
                }
            }
        }
        p
    }

    fn max_pool(&self, act: &Array2<T>, batch: usize) -> (Array2<T>, Vec<usize>) {
        let (h, w) = self.cfg.grid_shape();
        let (ph, pw) = self.cfg.pooled_shape();
        let f = self.cfg.conv_filters;
        let src = act.as_slice().expect("contiguous activations");
        let mut flat = Array2::zeros((batch, ph * pw * f));
        let mut idx = Vec::with_capacity(batch * ph * pw * f);
        for b in 0..batch {
            let mut out_row = flat.row_mut(b);
            let mut k = 0;
            for pi in 0..ph {
                for pj in 0..pw {
                    for c in 0..f {
                        let mut best = usize::MAX;
                        for di in 0..POOL {
                            for dj in 0..POOL {
                                let cell = ((b * h + pi * POOL + di) * w + pj * POOL + dj) * f + c;
                                if best == usize::MAX || src[cell] > src[best] {
                                    best = cell;
                                }
                            }
                        }
                        out_row[k] = src[best];
                        idx.push(best);
                        k += 1;
                    }
                }
            }
        }
        (flat, idx)
    }

    /// Batch forward pass; `x` holds one flattened grid per row. Dropout is
    /// applied only when masks are supplied.
    pub fn forward_batch(&self, x: ArrayView2<T>, masks: Option<DropoutMasks<T>>) -> Cache<T> {
        let batch = x.nrows();
        let patches = self.im2col(x);
        let mut conv_pre = patches.dot(&self.params.conv_w);
        conv_pre += &self.params.conv_b;
        let mut conv_act = conv_pre.clone();
        relu(&mut conv_act);
        let (flat, pool_src) = self.max_pool(&conv_act, batch);

        let [l1, l2, l3] = &self.params.dense;
        let z1 = affine(&flat, l1);
        let mut h1 = z1.clone();
        relu(&mut h1);
        if let Some(m) = &masks {
            h1 *= &m.hidden1;
        }
        let z2 = affine(&h1, l2);
        let mut h2 = z2.clone();
        relu(&mut h2);
        if let Some(m) = &masks {
            h2 *= &m.hidden2;
        }
        let output = affine(&h2, l3);
        Cache { patches, conv_pre, pool_src, flat, z1, h1, z2, h2, output, masks }
    }

    /// Gradients of the loss given `d_output = ∂L/∂output`.
    pub fn backward(&self, cache: &Cache<T>, d_output: &Array2<T>) -> Params<T> {
        let [l1, l2, l3] = &self.params.dense;
        let mut g = Params::zeros(&self.cfg);

        g.dense[2].w = cache.h2.t().dot(d_output);
        g.dense[2].b = d_output.sum_axis(Axis(0));
        let mut d2 = d_output.dot(&l3.w.t());
        if let Some(m) = &cache.masks {
            d2 *= &m.hidden2;
        }
        relu_backward(&mut d2, &cache.z2);

        g.dense[1].w = cache.h1.t().dot(&d2);
        g.dense[1].b = d2.sum_axis(Axis(0));
        let mut d1 = d2.dot(&l2.w.t());
        if let Some(m) = &cache.masks {
            d1 *= &m.hidden1;
        }
        relu_backward(&mut d1, &cache.z1);

        g.dense[0].w = cache.flat.t().dot(&d1);
        g.dense[0].b = d1.sum_axis(Axis(0));
        let d_flat = d1.dot(&l1.w.t());

        let mut d_conv = Array2::<T>::zeros(cache.conv_pre.raw_dim());
        {
            let dst = d_conv.as_slice_mut().expect("contiguous");
            for (&src, &gv) in cache.pool_src.iter().zip(d_flat.iter()) {
                dst[src] += gv;
            }
        }
        relu_backward(&mut d_conv, &cache.conv_pre);
        g.conv_w = cache.patches.t().dot(&d_conv);
        g.conv_b = d_conv.sum_axis(Axis(0));
        g
    }

    /// Deterministic batch inference.
    pub fn predict(&self, x: ArrayView2<T>) -> Array2<T> {
        const CHUNK: usize = 512;
        let n = x.nrows();
        let mut out = Array2::zeros((n, self.cfg.output_len()));
        let mut start = 0;
        while start < n {
            let end = (start + CHUNK).min(n);
            let y = self.forward_batch(x.slice(s![start..end, ..]), None).output;
            out.slice_mut(s![start..end, ..]).assign(&y);
            start = end;
        }
        out
    }

    /// Single-grid forward pass; dropout is sampled from `rng` when
    /// `training` is set.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        grid: &InputGrid<T>,
        training: bool,
        rng: &mut R,
    ) -> Result<TauVector<T>> {
        if grid.qubits() != self.cfg.qubits {
            return Err(NnError::Shape { expected: self.cfg.qubits, found: grid.qubits() });
        }
        let x = Array2::from_shape_vec((1, self.input_len()), grid.flat().collect())
            .expect("grid shape matches the configuration");
        let masks = training.then(|| DropoutMasks::sample(&self.cfg, 1, rng));
        let y = self.forward_batch(x.view(), masks).output;
        Ok(TauVector::new(self.cfg.qubits, y.into_raw_vec_and_offset().0)?)
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }
}

fn contiguous<T>(a: Option<&[T]>) -> &[T] {
    a.expect("parameters are contiguous")
}

fn contiguous_mut<T>(a: Option<&mut [T]>) -> &mut [T] {
    a.expect("parameters are contiguous")
}
