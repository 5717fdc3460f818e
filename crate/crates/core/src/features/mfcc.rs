use core::f64::consts::PI;

use num_complex::Complex64;

use super::{Columns, FeatureMatrix, Frames};
use crate::fft::Fft;
use crate::prelude::*;
use crate::Result;

/// Floor applied to mel energies before the log.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale between 0 Hz and
/// Nyquist.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    fft_size: usize,
    sample_rate: u32,
    /// Edge frequencies: filter `m` spans `edges[m]..edges[m + 2]`.
    edges: Vec<f64>,
    /// (first bin, weights) per filter.
    filters: Vec<(usize, Vec<f64>)>,
}

impl MelFilterbank {
    pub fn new(n_mels: usize, fft_size: usize, sample_rate: u32) -> Self {
        let nyquist = sample_rate as f64 / 2.0;
        let top = hz_to_mel(nyquist);
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64))
            .collect();
        let bin_hz = sample_rate as f64 / fft_size as f64;
        let filters = (0..n_mels)
            .map(|m| {
                let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                let mut first = None;
                let mut weights = Vec::new();
                for k in 0..=fft_size / 2 {
                    let f = k as f64 * bin_hz;
                    let w = if f > lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f < hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    };
                    if w > 0.0 {
                        first.get_or_insert(k);
                        weights.push(w);
                    } else if first.is_some() {
                        break;
                    }
                }
                (first.unwrap_or(0), weights)
            })
            .collect();
        Self { fft_size, sample_rate, edges, filters }
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Lower and upper edge in Hz of filter `m`.
    pub fn band(&self, m: usize) -> (f64, f64) {
        (self.edges[m], self.edges[m + 2])
    }

    pub fn center(&self, m: usize) -> f64 {
        self.edges[m + 1]
    }

    /// Filter outputs for a power spectrum of `fft_size / 2 + 1` bins.
    pub fn energies(&self, power: &[f64]) -> Vec<f64> {
        self.filters
            .iter()
            .map(|(first, w)| w.iter().zip(&power[*first..]).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Power spectrum of one frame zero-padded to the FFT size.
    pub fn power_spectrum(&self, fft: &Fft, frame: &[f64]) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_size];
        for (b, &x) in buf.iter_mut().zip(frame) {
            b.re = x;
        }
        fft.forward(&mut buf);
        buf[..=self.fft_size / 2].iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Orthonormal DCT-II basis truncated to the first `n_out` coefficients.
#[derive(Debug, Clone)]
pub struct Dct {
    n_in: usize,
    basis: Vec<f64>,
}

impl Dct {
    pub fn new(n_in: usize, n_out: usize) -> Self {
        let mut basis = Vec::with_capacity(n_in * n_out);
        for k in 0..n_out {
            let scale = if k == 0 {
                (1.0 / n_in as f64).sqrt()
            } else {
                (2.0 / n_in as f64).sqrt()
            };
            for m in 0..n_in {
                basis.push(scale * (PI * k as f64 * (m as f64 + 0.5) / n_in as f64).cos());
            }
        }
        Self { n_in, basis }
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        self.basis
            .chunks(self.n_in)
            .map(|row| row.iter().zip(input).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Per-frame cepstral analysis in 64-bit precision.
#[derive(Debug, Clone)]
pub struct MfccExtractor {
    fft: Fft,
    bank: MelFilterbank,
    dct: Dct,
}

impl MfccExtractor {
    pub fn new(frame_len: usize, n_mels: usize, n_ceps: usize, sample_rate: u32) -> Self {
        let fft_size = frame_len.next_power_of_two();
        Self {
            fft: Fft::new(fft_size),
            bank: MelFilterbank::new(n_mels, fft_size, sample_rate),
            dct: Dct::new(n_mels, n_ceps),
        }
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.bank
    }

    pub fn log_mel(&self, frame: &[f64]) -> Vec<f64> {
        let power = self.bank.power_spectrum(&self.fft, frame);
        self.bank.energies(&power).iter().map(|&e| e.max(LOG_FLOOR).ln()).collect()
    }

    pub fn cepstra(&self, frame: &[f64]) -> Vec<f64> {
        self.dct.apply(&self.log_mel(frame))
    }
}

/// Power spectrum (FFT size = next power of two >= frame length) -> mel
/// filterbank -> floored natural log -> orthonormal DCT-II, keeping
/// coefficients `0..n_ceps` (c0 included).
pub fn mfcc(frames: &Frames, n_mels: usize, n_ceps: usize, sample_rate: u32) -> Result<FeatureMatrix> {
    let extractor = MfccExtractor::new(frames.frame_len, n_mels, n_ceps, sample_rate);
    let mut data = Vec::with_capacity(frames.count() * n_ceps);
    for t in 0..frames.count() {
        data.extend(extractor.cepstra(frames.frame(t)).into_iter().map(|c| c as f32));
    }
    Ok(FeatureMatrix::from_parts(
        frames.count(),
        n_ceps,
        data,
        Columns::Mfcc,
        sample_rate,
        frames.hop,
    ))
}
