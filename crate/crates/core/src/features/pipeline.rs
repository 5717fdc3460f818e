use super::{
    add_deltas, apply_normalizer, frame_signal, mfcc, pitch_pov, splice, Columns, ContextWindowSpec, FeatureMatrix,
    FrameSpec, NormalizationStats, PitchConfig,
};
use crate::prelude::*;
use crate::{rng, Result, Waveform};

/// Frontend configuration: framing, cepstral analysis, pitch tracking and
/// context window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frontend {
    pub frame: FrameSpec,
    pub n_mels: usize,
    pub n_ceps: usize,
    pub pitch: PitchConfig,
    pub window: ContextWindowSpec,
}

impl Default for Frontend {
    fn default() -> Self {
        Self {
            frame: FrameSpec::default(),
            n_mels: 23,
            n_ceps: 13,
            pitch: PitchConfig::default(),
            window: ContextWindowSpec::default(),
        }
    }
}

impl Frontend {
    pub fn with_window(mut self, window: ContextWindowSpec) -> Self {
        self.window = window;
        self
    }

    /// 45-dim unspliced features: cepstra, pitch and PoV with deltas.
    pub fn base_features(&self, w: &Waveform) -> Result<FeatureMatrix> {
        let frames = frame_signal(w, &self.frame)?;
        let cepstra = mfcc(&frames, self.n_mels, self.n_ceps, w.sample_rate())?;
        let pitch = pitch_pov(w, &self.frame, &self.pitch)?;
        let base = cepstra.hstack(&pitch)?.with_columns(Columns::Base);
        add_deltas(&base)
    }

    /// Full chain: framing, cepstra and pitch, deltas, splicing, then
    /// normalization when stats are given.
    pub fn extract(&self, w: &Waveform, stats: Option<&NormalizationStats>) -> Result<FeatureMatrix> {
        let spliced = splice(&self.base_features(w)?, self.window);
        match stats {
            Some(s) => apply_normalizer(&spliced, s),
            None => Ok(spliced),
        }
    }

    /// Hash of everything that shapes the features except the context
    /// window; stored in model files to catch mismatched frontends.
    pub fn config_hash(&self) -> u64 {
        let desc = format!(
            "frame={}:{}:{:?}:{};mels={};ceps={};pitch={}:{}:{};deltas=2x{}",
            self.frame.frame_len,
            self.frame.hop,
            self.frame.window,
            self.frame.preemphasis,
            self.n_mels,
            self.n_ceps,
            self.pitch.f_min,
            self.pitch.f_max,
            self.pitch.window,
            super::DELTA_WINDOW,
        );
        rng::fnv1a(desc.as_bytes())
    }
}

/// `frame -> mfcc || pitch_pov -> deltas -> splice -> normalize`.
pub fn extract_pipeline(
    w: &Waveform,
    frame: &FrameSpec,
    window: ContextWindowSpec,
    stats: Option<&NormalizationStats>,
) -> Result<FeatureMatrix> {
    Frontend {
        frame: *frame,
        window,
        ..Frontend::default()
    }
    .extract(w, stats)
}
