use super::MlpModel;
use crate::features::FeatureMatrix;
use crate::linalg::{argmax, Real};
use crate::prelude::*;
use crate::{Error, Result};

const EVAL_CHUNK: usize = 1024;

/// Frame-level training data: spliced, normalized feature rows with one
/// class label each, pooled over utterances.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    dim: usize,
    num_classes: usize,
    features: Vec<f32>,
    labels: Vec<u32>,
}

impl FrameSet {
    pub fn new(dim: usize, num_classes: usize) -> Self {
        Self {
            dim,
            num_classes,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn from_raw(dim: usize, num_classes: usize, features: Vec<f32>, labels: Vec<u32>) -> Result<Self> {
        let mut set = Self::new(dim, num_classes);
        set.push_raw(&features, &labels)?;
        Ok(set)
    }

    /// Appends one utterance.
    pub fn push(&mut self, features: &FeatureMatrix, labels: &[u32]) -> Result<()> {
        if features.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: features.cols(),
            });
        }
        self.push_raw(features.data(), labels)
    }

    fn push_raw(&mut self, features: &[f32], labels: &[u32]) -> Result<()> {
        if features.len() != labels.len() * self.dim {
            return Err(Error::LengthMismatch {
                left: features.len() / self.dim.max(1),
                right: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l as usize >= self.num_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: self.num_classes,
            });
        }
        self.features.extend_from_slice(features);
        self.labels.extend_from_slice(labels);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    /// Copies the selected rows (converted to `T`) and their labels.
    pub fn gather<T: Real>(&self, rows: &[usize], x: &mut Vec<T>, labels: &mut Vec<u32>) {
        x.clear();
        labels.clear();
        for &r in rows {
            x.extend(self.row(r).iter().map(|&v| T::from_f64(v as f64)));
            labels.push(self.labels[r]);
        }
    }

    pub(crate) fn check_model<T: Real>(&self, model: &MlpModel<T>) -> Result<()> {
        let layout = model.layout();
        if layout.input() != self.dim || layout.output() != self.num_classes {
            return Err(Error::LayoutMismatch(format!(
                "model {layout} does not fit data with {} inputs and {} classes",
                self.dim, self.num_classes
            )));
        }
        Ok(())
    }

    /// Frame accuracy (%) of `model` on this set.
    pub fn accuracy<T: Real>(&self, model: &MlpModel<T>) -> Result<f64> {
        self.check_model(model)?;
        if self.is_empty() {
            return Err(Error::EmptyInput("frame set"));
        }
        let c = self.num_classes;
        let mut x = Vec::new();
        let mut labels = Vec::new();
        let mut hits = 0usize;
        let idx: Vec<usize> = (0..self.len()).collect();
        for chunk in idx.chunks(EVAL_CHUNK) {
            self.gather(chunk, &mut x, &mut labels);
            let post = model.forward_raw(&x, chunk.len())?;
            hits += post
                .chunks(c)
                .zip(&labels)
                .filter(|(row, &l)| argmax(row) == l as usize)
                .count();
        }
        Ok(100.0 * hits as f64 / self.len() as f64)
    }
}
