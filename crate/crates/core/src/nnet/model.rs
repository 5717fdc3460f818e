use core::fmt;

use rand::Rng;

use crate::features::FeatureMatrix;
use crate::linalg::{argmax, gemm, Matrix, Op, Real};
use crate::prelude::*;
use crate::{rng, Error, Result};

/// Rows pushed through the network at once during inference.
const INFERENCE_CHUNK: usize = 1024;

/// Layer widths from input to output, e.g. `765-300-300-30`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Layout {
    sizes: Vec<usize>,
}

impl Layout {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "layout needs at least input and output widths, all positive: {sizes:?}"
            )));
        }
        Ok(Self { sizes })
    }

    /// `input`, `hidden_layers` layers of `width`, then `output`.
    pub fn mlp(input: usize, hidden_layers: usize, width: usize, output: usize) -> Result<Self> {
        let mut sizes = vec![input];
        sizes.extend(core::iter::repeat_n(width, hidden_layers));
        sizes.push(output);
        Self::new(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input(&self) -> usize {
        self.sizes[0]
    }

    pub fn output(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn hidden(&self) -> &[usize] {
        &self.sizes[1..self.sizes.len() - 1]
    }

    /// Number of weight matrices.
    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn parse(s: &str) -> Result<Self> {
        let sizes = s
            .split('-')
            .map(|p| p.trim().parse::<usize>())
            .collect::<core::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidParameter(format!("bad layout {s:?}")))?;
        Self::new(sizes)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sizes.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Fully connected layer; `weights` is row-major `inputs x outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    inputs: usize,
    outputs: usize,
    weights: Vec<T>,
    bias: Vec<T>,
}

impl<T: Real> Dense<T> {
    pub fn new(inputs: usize, outputs: usize, weights: Vec<T>, bias: Vec<T>) -> Result<Self> {
        if weights.len() != inputs * outputs || bias.len() != outputs {
            return Err(Error::LayoutMismatch(format!(
                "layer {inputs}x{outputs} given {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite layer parameter".into()));
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![T::zero(); inputs * outputs],
            bias: vec![T::zero(); outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    /// `out = x * W + b` for `rows` inputs.
    fn affine(&self, x: &[T], rows: usize, out: &mut Vec<T>) {
        out.clear();
        out.reserve(rows * self.outputs);
        for _ in 0..rows {
            out.extend_from_slice(&self.bias);
        }
        gemm(Op::N, Op::N, rows, self.outputs, self.inputs, T::one(), x, &self.weights, T::one(), out);
    }

    fn cast<U: Real>(&self) -> Dense<U> {
        Dense {
            inputs: self.inputs,
            outputs: self.outputs,
            weights: self.weights.iter().map(|v| U::from_f64(Real::to_f64(*v))).collect(),
            bias: self.bias.iter().map(|v| U::from_f64(Real::to_f64(*v))).collect(),
        }
    }
}

fn sigmoid_in_place<T: Real>(v: &mut [T]) {
    for x in v {
        *x = T::one() / (T::one() + (-*x).exp());
    }
}

fn softmax_rows<T: Real>(v: &mut [T], cols: usize) {
    for row in v.chunks_mut(cols) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        let inv = T::one() / sum;
        for x in row.iter_mut() {
            *x *= inv;
        }
    }
}

/// Feed-forward classifier: sigmoid hidden layers, softmax output, and class
/// log-priors for hybrid decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T: Real = f32> {
    layout: Layout,
    layers: Vec<Dense<T>>,
    log_priors: Vec<f64>,
}

impl<T: Real> MlpModel<T> {
    /// Glorot-uniform weights `U(-r, r)`, `r = sqrt(6 / (fan_in + fan_out))`,
    /// zero biases and uniform priors.
    pub fn init_random(layout: &Layout, seed: u64) -> Self {
        let mut r = rng::seeded(seed);
        let layers = layout
            .sizes()
            .windows(2)
            .map(|w| {
                let (fi, fo) = (w[0], w[1]);
                let bound = (6.0 / (fi + fo) as f64).sqrt();
                let weights = (0..fi * fo).map(|_| T::from_f64(r.random_range(-bound..bound))).collect();
                Dense {
                    inputs: fi,
                    outputs: fo,
                    weights,
                    bias: vec![T::zero(); fo],
                }
            })
            .collect();
        Self {
            layout: layout.clone(),
            layers,
            log_priors: uniform_log_priors(layout.output()),
        }
    }

    pub fn zeros(layout: &Layout) -> Self {
        Self {
            layout: layout.clone(),
            layers: layout.sizes().windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            log_priors: uniform_log_priors(layout.output()),
        }
    }

    pub fn from_parts(layers: Vec<Dense<T>>, log_priors: Vec<f64>) -> Result<Self> {
        let first = layers.first().ok_or(Error::EmptyInput("layers"))?;
        let mut sizes = vec![first.inputs];
        for l in &layers {
            if l.inputs != *sizes.last().unwrap() {
                return Err(Error::LayoutMismatch(format!(
                    "layer input {} does not match previous output {}",
                    l.inputs,
                    sizes.last().unwrap()
                )));
            }
            sizes.push(l.outputs);
        }
        let layout = Layout::new(sizes)?;
        let mut model = Self {
            layout,
            layers,
            log_priors: Vec::new(),
        };
        model.set_log_priors(log_priors)?;
        Ok(model)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn log_priors(&self) -> &[f64] {
        &self.log_priors
    }

    pub fn num_classes(&self) -> usize {
        self.layout.output()
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Priors must be log-probabilities of a distribution over the classes.
    pub fn set_log_priors(&mut self, log_priors: Vec<f64>) -> Result<()> {
        if log_priors.len() != self.num_classes() {
            return Err(Error::DimensionMismatch {
                expected: self.num_classes(),
                got: log_priors.len(),
            });
        }
        let total: f64 = log_priors.iter().map(|l| l.exp()).sum();
        if !total.is_finite() || (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!("priors sum to {total}, not 1")));
        }
        self.log_priors = log_priors;
        Ok(())
    }

    /// Add-one smoothed class priors from label counts.
    pub fn set_priors_from_labels(&mut self, labels: &[u32]) -> Result<()> {
        let c = self.num_classes();
        let mut counts = vec![1.0f64; c];
        for &l in labels {
            let l = l as usize;
            if l >= c {
                return Err(Error::LabelOutOfRange {
                    label: l as u32,
                    classes: c,
                });
            }
            counts[l] += 1.0;
        }
        let total = (labels.len() + c) as f64;
        self.log_priors = counts.iter().map(|n| (n / total).ln()).collect();
        Ok(())
    }

    /// Same parameters in another precision.
    pub fn cast<U: Real>(&self) -> MlpModel<U> {
        MlpModel {
            layout: self.layout.clone(),
            layers: self.layers.iter().map(Dense::cast).collect(),
            log_priors: self.log_priors.clone(),
        }
    }

    /// Every layer's output for a batch; the last entry holds the softmax
    /// posteriors.
    fn activations(&self, x: &[T], rows: usize) -> Vec<Vec<T>> {
        let mut acts: Vec<Vec<T>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let input = if i == 0 { x } else { &acts[i - 1] };
            let mut out = Vec::new();
            layer.affine(input, rows, &mut out);
            if i + 1 == self.layers.len() {
                softmax_rows(&mut out, layer.outputs);
            } else {
                sigmoid_in_place(&mut out);
            }
            acts.push(out);
        }
        acts
    }

    fn check_input(&self, len: usize, rows: usize) -> Result<()> {
        if len != rows * self.layout.input() {
            return Err(Error::DimensionMismatch {
                expected: self.layout.input(),
                got: if rows == 0 { len } else { len / rows },
            });
        }
        Ok(())
    }

    /// Posteriors for `rows` row-major inputs.
    pub fn forward_raw(&self, x: &[T], rows: usize) -> Result<Vec<T>> {
        self.check_input(x.len(), rows)?;
        let d = self.layout.input();
        let mut out = Vec::with_capacity(rows * self.num_classes());
        for start in (0..rows).step_by(INFERENCE_CHUNK) {
            let n = INFERENCE_CHUNK.min(rows - start);
            let mut acts = self.activations(&x[start * d..(start + n) * d], n);
            out.append(acts.last_mut().unwrap());
        }
        Ok(out)
    }

    /// Posterior matrix for a feature matrix; rows sum to one.
    pub fn forward(&self, features: &FeatureMatrix) -> Result<Matrix<T>> {
        if features.cols() != self.layout.input() {
            return Err(Error::DimensionMismatch {
                expected: self.layout.input(),
                got: features.cols(),
            });
        }
        let x: Vec<T> = features.data().iter().map(|&v| T::from_f64(v as f64)).collect();
        Matrix::new(features.rows(), self.num_classes(), self.forward_raw(&x, features.rows())?)
    }

    fn check_labels(&self, labels: &[u32]) -> Result<()> {
        let c = self.num_classes();
        match labels.iter().find(|&&l| l as usize >= c) {
            Some(&label) => Err(Error::LabelOutOfRange { label, classes: c }),
            None => Ok(()),
        }
    }

    /// Mean cross-entropy of a batch.
    pub fn cross_entropy(&self, x: &[T], labels: &[u32]) -> Result<f64> {
        self.check_labels(labels)?;
        let rows = labels.len();
        self.check_input(x.len(), rows)?;
        let acts = self.activations(x, rows);
        Ok(mean_cross_entropy(acts.last().unwrap(), labels, self.num_classes()))
    }

    /// Mean cross-entropy of a batch and its gradient with respect to every
    /// layer's weights and biases.
    pub fn gradient(&self, x: &[T], labels: &[u32]) -> Result<(f64, Vec<Dense<T>>)> {
        self.check_labels(labels)?;
        let rows = labels.len();
        self.check_input(x.len(), rows)?;
        if rows == 0 {
            return Err(Error::EmptyInput("minibatch"));
        }
        let acts = self.activations(x, rows);
        let c = self.num_classes();
        let loss = mean_cross_entropy(acts.last().unwrap(), labels, c);

        // Output error: (softmax - one_hot) / rows.
        let scale = T::from_f64(1.0 / rows as f64);
        let mut delta: Vec<T> = acts.last().unwrap().clone();
        for (r, &l) in labels.iter().enumerate() {
            delta[r * c + l as usize] -= T::one();
        }
        for v in delta.iter_mut() {
            *v *= scale;
        }

        let mut grads: Vec<Dense<T>> = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let input = if i == 0 { x } else { &acts[i - 1] };
            let mut g = Dense::zeros(layer.inputs, layer.outputs);
            gemm(Op::T, Op::N, layer.inputs, layer.outputs, rows, T::one(), input, &delta, T::zero(), &mut g.weights);
            for row in delta.chunks(layer.outputs) {
                for (b, &d) in g.bias.iter_mut().zip(row) {
                    *b += d;
                }
            }
            if i > 0 {
                let mut back = vec![T::zero(); rows * layer.inputs];
                gemm(Op::N, Op::T, rows, layer.inputs, layer.outputs, T::one(), &delta, &layer.weights, T::zero(), &mut back);
                for (b, &a) in back.iter_mut().zip(input.iter()) {
                    *b *= a * (T::one() - a);
                }
                delta = back;
            }
            grads.push(g);
        }
        grads.reverse();
        Ok((loss, grads))
    }

    /// `params -= lr * grads`.
    pub fn apply_gradient(&mut self, grads: &[Dense<T>], lr: T) {
        for (layer, g) in self.layers.iter_mut().zip(grads) {
            for (w, &d) in layer.weights.iter_mut().zip(&g.weights) {
                *w -= lr * d;
            }
            for (b, &d) in layer.bias.iter_mut().zip(&g.bias) {
                *b -= lr * d;
            }
        }
    }

    /// One SGD step on a minibatch; returns the batch cross-entropy before
    /// the update.
    pub fn backprop_step(&mut self, x: &[T], labels: &[u32], lr: T) -> Result<f64> {
        let (loss, grads) = self.gradient(x, labels)?;
        self.apply_gradient(&grads, lr);
        Ok(loss)
    }

    /// Percentage of frames whose arg-max posterior equals the label.
    pub fn accuracy_raw(&self, x: &[T], labels: &[u32]) -> Result<f64> {
        if labels.is_empty() {
            return Err(Error::EmptyInput("labels"));
        }
        let post = self.forward_raw(x, labels.len())?;
        let c = self.num_classes();
        let hits = post
            .chunks(c)
            .zip(labels)
            .filter(|(row, &l)| argmax(row) == l as usize)
            .count();
        Ok(100.0 * hits as f64 / labels.len() as f64)
    }
}

fn uniform_log_priors(c: usize) -> Vec<f64> {
    vec![-(c as f64).ln(); c]
}

fn mean_cross_entropy<T: Real>(post: &[T], labels: &[u32], c: usize) -> f64 {
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(r, &l)| -Real::to_f64(post[r * c + l as usize]).max(f64::MIN_POSITIVE).ln())
        .sum();
    total / labels.len() as f64
}

/// `100 * #(argmax == label) / #frames` for one feature matrix.
pub fn frame_accuracy<T: Real>(model: &MlpModel<T>, features: &FeatureMatrix, labels: &[u32]) -> Result<f64> {
    if features.rows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.rows(),
            right: labels.len(),
        });
    }
    let post = model.forward(features)?;
    if labels.is_empty() {
        return Err(Error::EmptyInput("labels"));
    }
    let hits = (0..post.rows()).filter(|&r| argmax(post.row(r)) == labels[r] as usize).count();
    Ok(100.0 * hits as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn init_is_deterministic_and_shaped() {
        let layout = Layout::new(vec![765, 300, 300, 84]).unwrap();
        let a = MlpModel::<f32>::init_random(&layout, 3);
        assert_eq!(a, MlpModel::init_random(&layout, 3));
        assert_ne!(a, MlpModel::init_random(&layout, 4));
        let shapes: Vec<(usize, usize)> = a.layers().iter().map(|l| (l.inputs(), l.outputs())).collect();
        assert_eq!(shapes, vec![(765, 300), (300, 300), (300, 84)]);
        assert!(a.layers().iter().all(|l| l.bias().iter().all(|&b| b == 0.0)));
        let bound = (6.0f32 / 1065.0).sqrt();
        assert!(a.layers()[0].weights().iter().all(|w| w.abs() <= bound));
        assert_eq!(layout.to_string(), "765-300-300-84");
        assert_eq!(Layout::parse("765-300-300-84").unwrap(), layout);
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = MlpModel::<f64>::zeros(&Layout::new(vec![4, 3, 5]).unwrap());
        let post = m.forward_raw(&[0.3, -1.0, 2.0, 0.0], 1).unwrap();
        assert!(post.iter().all(|&p| (p - 0.2).abs() < 1e-15));
    }

    #[test]
    fn rows_sum_to_one() {
        let m = MlpModel::<f32>::init_random(&Layout::new(vec![6, 8, 7]).unwrap(), 1);
        let mut r = rng::seeded(2);
        let x: Vec<f32> = (0..6 * 50).map(|_| 3.0 * Distribution::<f32>::sample(&StandardNormal, &mut r)).collect();
        for row in m.forward_raw(&x, 50).unwrap().chunks(7) {
            assert!((row.iter().sum::<f32>() - 1.0).abs() < 1e-6);
            assert!(row.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn width_and_label_errors() {
        let mut m = MlpModel::<f32>::init_random(&Layout::new(vec![3, 2]).unwrap(), 1);
        assert!(m.forward_raw(&[0.0; 4], 1).is_err());
        assert_eq!(
            m.backprop_step(&[0.0; 3], &[2], 0.1),
            Err(Error::LabelOutOfRange { label: 2, classes: 2 })
        );
    }

    #[test]
    fn zero_lr_leaves_model() {
        let mut m = MlpModel::<f32>::init_random(&Layout::new(vec![3, 4, 2]).unwrap(), 1);
        let before = m.clone();
        m.backprop_step(&[0.1, 0.2, 0.3], &[1], 0.0).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn step_lowers_single_example_loss() {
        let mut m = MlpModel::<f64>::init_random(&Layout::new(vec![5, 6, 3]).unwrap(), 9);
        let x = [0.5, -0.2, 0.1, 0.9, -1.0];
        let before = m.backprop_step(&x, &[2], 1e-3).unwrap();
        assert!(m.cross_entropy(&x, &[2]).unwrap() < before);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let layout = Layout::new(vec![10, 8, 5]).unwrap();
        let mut m = MlpModel::<f64>::init_random(&layout, 5);
        let mut r = rng::seeded(6);
        let x: Vec<f64> = (0..40).map(|_| StandardNormal.sample(&mut r)).collect();
        let labels = [0u32, 3, 4, 1];
        let (_, grads) = m.gradient(&x, &labels).unwrap();
        let eps = 1e-5;
        for li in 0..2 {
            for k in 0..m.layers()[li].weights().len() {
                let orig = m.layers()[li].weights()[k];
                m.layers_mut()[li].weights_mut()[k] = orig + eps;
                let up = m.cross_entropy(&x, &labels).unwrap();
                m.layers_mut()[li].weights_mut()[k] = orig - eps;
                let down = m.cross_entropy(&x, &labels).unwrap();
                m.layers_mut()[li].weights_mut()[k] = orig;
                let fd = (up - down) / (2.0 * eps);
                let an = grads[li].weights()[k];
                assert!((fd - an).abs() <= 1e-4 * fd.abs().max(an.abs()).max(1e-6), "{fd} vs {an}");
            }
        }
    }

    #[test]
    fn priors_from_labels_are_smoothed() {
        let mut m = MlpModel::<f32>::zeros(&Layout::new(vec![2, 3]).unwrap());
        m.set_priors_from_labels(&[0, 0, 1]).unwrap();
        let p: Vec<f64> = m.log_priors().iter().map(|l| l.exp()).collect();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[2] - 1.0 / 6.0).abs() < 1e-12);
        assert!(m.set_log_priors(vec![0.0; 3]).is_err());
    }

    #[test]
    fn accuracy_rules() {
        let m = MlpModel::<f32>::zeros(&Layout::new(vec![1, 3]).unwrap());
        let f = FeatureMatrix::new(4, 1, vec![0.0; 4]).unwrap();
        // Uniform posteriors: ties go to class 0.
        assert_eq!(frame_accuracy(&m, &f, &[0, 2, 1, 0]).unwrap(), 50.0);
        assert_eq!(frame_accuracy(&m, &f, &[1, 2, 1, 0]).unwrap(), 25.0);
        assert!(frame_accuracy(&m, &f, &[0]).is_err());
    }
}
