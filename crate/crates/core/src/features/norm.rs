use super::FeatureMatrix;
use crate::prelude::*;
use crate::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub count: u64,
}

impl NormalizationStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Mergeable `(sum, sum of squares, count)` accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct NormAccumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    count: u64,
}

impl NormAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            sum: vec![0.0; dim],
            sum_sq: vec![0.0; dim],
            count: 0,
        }
    }

    pub fn add(&mut self, f: &FeatureMatrix) -> Result<()> {
        if f.cols() != self.sum.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sum.len(),
                got: f.cols(),
            });
        }
        for r in 0..f.rows() {
            for ((s, q), &v) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(f.row(r)) {
                let v = v as f64;
                *s += v;
                *q += v * v;
            }
        }
        self.count += f.rows() as u64;
        Ok(())
    }

    pub fn merge(&mut self, other: &NormAccumulator) -> Result<()> {
        if other.sum.len() != self.sum.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sum.len(),
                got: other.sum.len(),
            });
        }
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.count += other.count;
        Ok(())
    }

    pub fn finish(&self) -> Result<NormalizationStats> {
        if self.count < 2 {
            return Err(Error::InvalidParameter(format!(
                "normalization needs at least 2 frames, got {}",
                self.count
            )));
        }
        let n = self.count as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let variance = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| (q / n - m * m).max(0.0))
            .collect();
        Ok(NormalizationStats { mean, variance, count: self.count })
    }
}

/// Global per-dimension mean and variance over a set of matrices.
pub fn fit_normalizer<'a, I>(features: I) -> Result<NormalizationStats>
where
    I: IntoIterator<Item = &'a FeatureMatrix>,
{
    let mut iter = features.into_iter().peekable();
    let dim = iter.peek().map(|f| f.cols()).ok_or(Error::EmptyInput("features"))?;
    let mut acc = NormAccumulator::new(dim);
    for f in iter {
        acc.add(f)?;
    }
    acc.finish()
}

/// `(x - mean) / sqrt(max(var, 1e-8))` per column.
pub fn apply_normalizer(f: &FeatureMatrix, stats: &NormalizationStats) -> Result<FeatureMatrix> {
    if f.cols() != stats.dim() {
        return Err(Error::DimensionMismatch {
            expected: stats.dim(),
            got: f.cols(),
        });
    }
    let inv_std: Vec<f64> = stats
        .variance
        .iter()
        .map(|v| 1.0 / v.max(VARIANCE_FLOOR).sqrt())
        .collect();
    let mut out = f.clone();
    for r in 0..out.rows() {
        for ((x, m), s) in out.row_mut(r).iter_mut().zip(&stats.mean).zip(&inv_std) {
            *x = ((*x as f64 - m) * s) as f32;
        }
    }
    Ok(out)
}
