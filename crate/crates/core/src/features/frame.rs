use core::f64::consts::PI;

use crate::prelude::*;
use crate::{Error, Result, Waveform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Hamming,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    /// Frame length in seconds.
    pub frame_len: f64,
    /// Frame shift in seconds.
    pub hop: f64,
    pub window: Window,
    pub preemphasis: f64,
}

impl FrameSpec {
    pub fn new(frame_len: f64, hop: f64, preemphasis: f64) -> Result<Self> {
        let spec = Self { frame_len, hop, window: Window::Hamming, preemphasis };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hop > 0.0 && self.hop <= self.frame_len) {
            return Err(Error::InvalidParameter(format!(
                "frame spec requires 0 < hop <= frame_len (hop {}, frame {})",
                self.hop, self.frame_len
            )));
        }
        if !(0.0..1.0).contains(&self.preemphasis) {
            return Err(Error::InvalidParameter("preemphasis must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn frame_samples(&self, sample_rate: u32) -> usize {
        (self.frame_len * sample_rate as f64).round() as usize
    }

    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        (self.hop * sample_rate as f64).round() as usize
    }

    /// `1 + floor((n - frame) / hop)` for signals of at least one frame.
    pub fn frame_count(&self, num_samples: usize, sample_rate: u32) -> usize {
        let frame = self.frame_samples(sample_rate);
        if num_samples < frame {
            0
        } else {
            1 + (num_samples - frame) / self.hop_samples(sample_rate)
        }
    }
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            frame_len: 0.025,
            hop: 0.010,
            window: Window::Hamming,
            preemphasis: 0.97,
        }
    }
}

/// Windowed analysis frames, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frames {
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
    pub data: Vec<f64>,
}

impl Frames {
    pub fn count(&self) -> usize {
        if self.frame_len == 0 {
            0
        } else {
            self.data.len() / self.frame_len
        }
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.frame_len..(t + 1) * self.frame_len]
    }
}

fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Frame `t` covers samples `[t * hop, t * hop + frame_len)`; each frame is
/// pre-emphasized (first sample against itself) and Hamming windowed.
pub fn frame_signal(w: &Waveform, spec: &FrameSpec) -> Result<Frames> {
    spec.validate()?;
    let sr = w.sample_rate();
    let frame_len = spec.frame_samples(sr);
    let hop = spec.hop_samples(sr);
    if w.len() < frame_len || frame_len == 0 {
        return Err(Error::ShorterThanFrame { len: w.len(), frame_len });
    }
    let count = spec.frame_count(w.len(), sr);
    let window = match spec.window {
        Window::Hamming => hamming(frame_len),
    };
    let samples = w.samples();
    let mut data = Vec::with_capacity(count * frame_len);
    for t in 0..count {
        let seg = &samples[t * hop..t * hop + frame_len];
        for i in 0..frame_len {
            let prev = if i == 0 { seg[0] } else { seg[i - 1] } as f64;
            data.push((seg[i] as f64 - spec.preemphasis * prev) * window[i]);
        }
    }
    Ok(Frames { frame_len, hop, sample_rate: sr, data })
}
