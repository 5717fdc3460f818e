//! Acoustic frontend: 25 ms / 10 ms framing, 13 MFCCs plus pitch and
//! probability of voicing, regression deltas (45 dims), context splicing and
//! global mean/variance normalization.

mod delta;
mod frame;
mod mfcc;
mod norm;
mod pipeline;
mod pitch;
mod splice;

pub use delta::{add_deltas, deltas, DELTA_WINDOW};
pub use frame::{frame_signal, FrameSpec, Frames, Window};
pub use mfcc::{hz_to_mel, mel_to_hz, mfcc, Dct, MelFilterbank, MfccExtractor};
pub use norm::{apply_normalizer, fit_normalizer, NormAccumulator, NormalizationStats, VARIANCE_FLOOR};
pub use pipeline::{extract_pipeline, Frontend};
pub use pitch::{nccf, pitch_pov, PitchConfig};
pub use splice::{splice, ContextWindowSpec};

use crate::prelude::*;
use crate::{Error, Result};

/// Width of the static block: 13 cepstra, pitch and voicing.
pub const BASE_DIM: usize = 15;
/// Static block plus first and second derivatives.
pub const FEATURE_DIM: usize = 3 * BASE_DIM;

/// What the columns of a [`FeatureMatrix`] hold; used for column labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Columns {
    Generic,
    Mfcc,
    PitchPov,
    /// 13 cepstra, pitch, PoV.
    Base,
    /// `Base` followed by its deltas and delta-deltas.
    WithDeltas,
    Spliced { past: usize, future: usize },
}

/// Row-major frames x dims matrix of `f32` features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
    columns: Columns,
    sample_rate: u32,
    hop: usize,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: rows * cols,
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            rows,
            cols,
            data,
            columns: Columns::Generic,
            sample_rate: crate::SAMPLE_RATE,
            hop: 160,
        })
    }

    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f32>, columns: Columns, sample_rate: u32, hop: usize) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data, columns, sample_rate, hop }
    }

    pub fn with_columns(mut self, columns: Columns) -> Self {
        self.columns = columns;
        self
    }

    pub fn with_geometry(mut self, sample_rate: u32, hop: usize) -> Self {
        self.sample_rate = sample_rate;
        self.hop = hop;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<f32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns_kind(&self) -> &Columns {
        &self.columns
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Frame shift in samples.
    pub fn hop(&self) -> usize {
        self.hop
    }

    /// Start time of frame `r` in seconds.
    pub fn frame_time(&self, r: usize) -> f64 {
        (r * self.hop) as f64 / self.sample_rate as f64
    }

    pub fn column_label(&self, c: usize) -> String {
        fn base(c: usize) -> String {
            match c {
                0..=12 => format!("mfcc{c}"),
                13 => "pitch".into(),
                _ => "pov".into(),
            }
        }
        fn with_deltas(c: usize) -> String {
            let prefix = ["", "d_", "dd_"][c / BASE_DIM];
            format!("{prefix}{}", base(c % BASE_DIM))
        }
        match &self.columns {
            Columns::Generic => format!("dim{c}"),
            Columns::Mfcc => format!("mfcc{c}"),
            Columns::PitchPov => base(13 + c),
            Columns::Base => base(c),
            Columns::WithDeltas => with_deltas(c),
            Columns::Spliced { past, .. } => {
                let offset = (c / FEATURE_DIM) as i64 - *past as i64;
                format!("t{offset:+}:{}", with_deltas(c % FEATURE_DIM))
            }
        }
    }

    /// Horizontal concatenation of two matrices with equal row counts.
    pub fn hstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.rows != other.rows {
            return Err(Error::LengthMismatch {
                left: self.rows,
                right: other.rows,
            });
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Self::from_parts(self.rows, cols, data, Columns::Generic, self.sample_rate, self.hop))
    }
}
