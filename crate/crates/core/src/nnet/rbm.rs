use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Dense, FrameSet, Layout, MlpModel};
use crate::linalg::{gemm, Op, Real};
use crate::prelude::*;
use crate::{rng, Error, Result};

/// Greedy layer-wise CD-1 settings. The first layer is Gaussian-Bernoulli
/// (unit-variance visible units), the rest Bernoulli-Bernoulli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbmConfig {
    pub epochs_per_layer: usize,
    pub lr_gb: f64,
    pub lr_bb: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for RbmConfig {
    fn default() -> Self {
        Self {
            epochs_per_layer: 3,
            lr_gb: 0.001,
            lr_bb: 0.01,
            batch_size: 100,
            seed: 0,
        }
    }
}

/// Mean squared reconstruction error per layer and epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmReport {
    pub reconstruction_error: Vec<Vec<f64>>,
}

fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// `out = x * W + bias` followed by the logistic function.
fn propagate_up<T: Real>(x: &[T], rows: usize, w: &[T], bias: &[T], out: &mut Vec<T>) {
    let (din, dout) = (w.len() / bias.len(), bias.len());
    out.clear();
    for _ in 0..rows {
        out.extend_from_slice(bias);
    }
    gemm(Op::N, Op::N, rows, dout, din, T::one(), x, w, T::one(), out);
    for v in out.iter_mut() {
        *v = sigmoid(*v);
    }
}

struct Rbm<T> {
    visible: usize,
    hidden: usize,
    w: Vec<T>,
    vbias: Vec<T>,
    hbias: Vec<T>,
    gaussian: bool,
}

impl<T: Real> Rbm<T> {
    fn new(visible: usize, hidden: usize, gaussian: bool, r: &mut rng::Rng) -> Self {
        let normal = Normal::new(0.0, 0.01).unwrap();
        Self {
            visible,
            hidden,
            w: (0..visible * hidden).map(|_| T::from_f64(normal.sample(r))).collect(),
            vbias: vec![T::zero(); visible],
            hbias: vec![T::zero(); hidden],
            gaussian,
        }
    }

    /// One CD-1 update on a batch; returns the summed squared reconstruction
    /// error.
    fn cd1(&mut self, v0: &[T], rows: usize, lr: T, r: &mut rng::Rng) -> f64 {
        let (nv, nh) = (self.visible, self.hidden);
        let mut h0 = Vec::new();
        propagate_up(v0, rows, &self.w, &self.hbias, &mut h0);
        let h0s: Vec<T> = h0
            .iter()
            .map(|&p| if r.random::<f64>() < Real::to_f64(p) { T::one() } else { T::zero() })
            .collect();
        let mut v1 = Vec::with_capacity(rows * nv);
        for _ in 0..rows {
            v1.extend_from_slice(&self.vbias);
        }
        gemm(Op::N, Op::T, rows, nv, nh, T::one(), &h0s, &self.w, T::one(), &mut v1);
        if !self.gaussian {
            for v in v1.iter_mut() {
                *v = sigmoid(*v);
            }
        }
        let mut h1 = Vec::new();
        propagate_up(&v1, rows, &self.w, &self.hbias, &mut h1);

        let scale = lr / T::from_f64(rows as f64);
        gemm(Op::T, Op::N, nv, nh, rows, scale, v0, &h0, T::one(), &mut self.w);
        gemm(Op::T, Op::N, nv, nh, rows, -scale, &v1, &h1, T::one(), &mut self.w);
        let mut err = 0.0;
        for (row0, row1) in v0.chunks(nv).zip(v1.chunks(nv)) {
            for ((b, &a), &c) in self.vbias.iter_mut().zip(row0).zip(row1) {
                *b += scale * (a - c);
                let d = Real::to_f64(a - c);
                err += d * d;
            }
        }
        for (row0, row1) in h0.chunks(nh).zip(h1.chunks(nh)) {
            for ((b, &a), &c) in self.hbias.iter_mut().zip(row0).zip(row1) {
                *b += scale * (a - c);
            }
        }
        err
    }
}

/// Greedy layer-wise RBM pre-training of the hidden layers of `layout`.
/// Each trained layer's hidden probabilities become the next layer's data;
/// the output layer gets a random initialization.
pub fn rbm_pretrain<T: Real>(data: &FrameSet, layout: &Layout, config: &RbmConfig) -> Result<(MlpModel<T>, RbmReport)> {
    if data.dim() != layout.input() {
        return Err(Error::LayoutMismatch(format!(
            "layout {layout} does not take {}-dim input",
            data.dim()
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyInput("pre-training data"));
    }
    if config.batch_size == 0 || !(config.lr_gb > 0.0 && config.lr_bb > 0.0) {
        return Err(Error::InvalidParameter("batch size and learning rates must be positive".into()));
    }
    let n = data.len();
    let mut visible: Vec<T> = data.features().iter().map(|&v| T::from_f64(v as f64)).collect();
    let mut model = MlpModel::<T>::init_random(layout, rng::derive_seed(config.seed, "rbm-output"));
    let mut report = RbmReport {
        reconstruction_error: Vec::new(),
    };
    let sizes = layout.sizes().to_vec();
    let mut order: Vec<usize> = (0..n).collect();
    let mut batch = Vec::new();
    for (l, pair) in sizes.windows(2).take(layout.depth() - 1).enumerate() {
        let (nv, nh) = (pair[0], pair[1]);
        let mut r = rng::seeded(rng::derive_seed(config.seed, &format!("rbm-layer-{l}")));
        let gaussian = l == 0;
        let mut rbm = Rbm::<T>::new(nv, nh, gaussian, &mut r);
        let lr = T::from_f64(if gaussian { config.lr_gb } else { config.lr_bb });
        let mut errors = Vec::with_capacity(config.epochs_per_layer);
        for _ in 0..config.epochs_per_layer {
            order.sort_unstable();
            order.shuffle(&mut r);
            let mut err = 0.0;
            for idx in order.chunks(config.batch_size) {
                batch.clear();
                for &i in idx {
                    batch.extend_from_slice(&visible[i * nv..(i + 1) * nv]);
                }
                err += rbm.cd1(&batch, idx.len(), lr, &mut r);
            }
            errors.push(err / (n * nv) as f64);
        }
        report.reconstruction_error.push(errors);
        let mut next = Vec::new();
        propagate_up(&visible, n, &rbm.w, &rbm.hbias, &mut next);
        visible = next;
        model.layers_mut()[l] = Dense::new(nv, nh, rbm.w, rbm.hbias)?;
    }
    Ok((model, report))
}
