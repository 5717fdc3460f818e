use super::{Columns, FeatureMatrix, FrameSpec};
use crate::prelude::*;
use crate::{Error, Result, Waveform};

const NCCF_EPS: f64 = 1e-12;
const SILENCE_ENERGY: f64 = 1e-8;
/// A shorter-lag peak within this much of the global NCCF maximum wins,
/// which keeps exact multiples of the period from being picked.
const OCTAVE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchConfig {
    pub f_min: f64,
    pub f_max: f64,
    /// Analysis window in seconds, centered on each frame.
    pub window: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self { f_min: 50.0, f_max: 400.0, window: 0.040 }
    }
}

/// Normalized cross-correlation of `s` with itself at each lag in
/// `min_lag..=max_lag`.
pub fn nccf(s: &[f64], min_lag: usize, max_lag: usize) -> Vec<f64> {
    (min_lag..=max_lag)
        .map(|lag| {
            if lag >= s.len() {
                return 0.0;
            }
            let (a, b) = (&s[..s.len() - lag], &s[lag..]);
            let mut num = 0.0;
            let mut ea = 0.0;
            let mut eb = 0.0;
            for (x, y) in a.iter().zip(b) {
                num += x * y;
                ea += x * x;
                eb += y * y;
            }
            num / (ea * eb + NCCF_EPS).sqrt()
        })
        .collect()
}

/// Pitch (Hz) and probability of voicing per frame on the `spec` grid.
///
/// Each frame is analysed over an extended window centered on it
/// (zero-padded at the signal edges) so lags down to `f_min` fit.
pub fn pitch_pov(w: &Waveform, spec: &FrameSpec, config: &PitchConfig) -> Result<FeatureMatrix> {
    spec.validate()?;
    if !(config.f_min > 0.0 && config.f_min < config.f_max) {
        return Err(Error::InvalidParameter("pitch range must satisfy 0 < f_min < f_max".into()));
    }
    let sr = w.sample_rate();
    let frame_len = spec.frame_samples(sr);
    let hop = spec.hop_samples(sr);
    if w.len() < frame_len {
        return Err(Error::ShorterThanFrame { len: w.len(), frame_len });
    }
    let count = spec.frame_count(w.len(), sr);
    let min_lag = (sr as f64 / config.f_max).round().max(1.0) as usize;
    let max_lag = (sr as f64 / config.f_min).round() as usize;
    let win = ((config.window * sr as f64).round() as usize).max(max_lag + 1);
    let samples = w.samples();
    let mut data = Vec::with_capacity(count * 2);
    let mut buf = vec![0.0f64; win];
    for t in 0..count {
        let center = (t * hop + frame_len / 2) as isize;
        let start = center - (win / 2) as isize;
        for (i, b) in buf.iter_mut().enumerate() {
            let idx = start + i as isize;
            *b = if idx >= 0 && (idx as usize) < samples.len() {
                samples[idx as usize] as f64
            } else {
                0.0
            };
        }
        let (pitch, pov) = frame_pitch(&buf, sr, min_lag, max_lag);
        data.push(pitch as f32);
        data.push(pov as f32);
    }
    Ok(FeatureMatrix::from_parts(count, 2, data, Columns::PitchPov, sr, hop))
}

fn frame_pitch(buf: &[f64], sr: u32, min_lag: usize, max_lag: usize) -> (f64, f64) {
    let energy: f64 = buf.iter().map(|x| x * x).sum();
    if energy < SILENCE_ENERGY {
        return (0.0, 0.0);
    }
    let r = nccf(buf, min_lag, max_lag);
    let best = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let is_peak = |i: usize| {
        let left = i == 0 || r[i] >= r[i - 1];
        let right = i + 1 == r.len() || r[i] >= r[i + 1];
        left && right
    };
    let chosen = (0..r.len())
        .find(|&i| is_peak(i) && r[i] >= best - OCTAVE_TOLERANCE)
        .unwrap_or(0);
    let lag = min_lag + chosen;
    (sr as f64 / lag as f64, best.clamp(0.0, 1.0))
}
