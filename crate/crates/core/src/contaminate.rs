//! Contamination of close-talk speech: `y = x * h + alpha * n`.

use rand::Rng as _;

use crate::fft::Convolver;
use crate::ir::ImpulseResponse;
use crate::linalg::mean_power;
use crate::prelude::*;
use crate::{rng, Error, Result, Waveform};

/// SNR reported for a silent signal.
pub const SILENT_SNR_DB: f64 = -120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrimPolicy {
    /// Full linear convolution, `|x| + |h| - 1` samples.
    Full,
    /// `|x|` samples starting at the direct path, time-aligned with `x`.
    #[default]
    SameLength,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContaminationSpec {
    pub ir: ImpulseResponse,
    pub noise: Option<Waveform>,
    pub target_snr_db: f64,
    /// Half-width of a uniform per-utterance perturbation of the target SNR.
    pub snr_jitter_db: f64,
    pub noise_offset_seed: u64,
    pub trim: TrimPolicy,
}

impl ContaminationSpec {
    pub fn reverb_only(ir: ImpulseResponse) -> Self {
        Self {
            ir,
            noise: None,
            target_snr_db: 10.0,
            snr_jitter_db: 0.0,
            noise_offset_seed: 0,
            trim: TrimPolicy::SameLength,
        }
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        if self.ir.sample_rate() != sample_rate {
            return Err(Error::SampleRateMismatch {
                expected: sample_rate,
                got: self.ir.sample_rate(),
            });
        }
        if let Some(noise) = &self.noise {
            if noise.sample_rate() != sample_rate {
                return Err(Error::SampleRateMismatch {
                    expected: sample_rate,
                    got: noise.sample_rate(),
                });
            }
            if noise.is_empty() {
                return Err(Error::EmptyInput("noise"));
            }
        }
        if !self.target_snr_db.is_finite() || !(self.snr_jitter_db >= 0.0) {
            return Err(Error::InvalidParameter("SNR target must be finite, jitter non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixReport {
    pub alpha: f64,
    pub achieved_snr_db: f64,
    pub noise_offset: usize,
}

/// Precomputed reverberation for one response; reusable across utterances.
#[derive(Debug, Clone)]
pub struct Reverberator {
    convolver: Convolver,
    direct_path_index: usize,
    sample_rate: u32,
}

impl Reverberator {
    pub fn new(ir: &ImpulseResponse) -> Self {
        Self {
            convolver: Convolver::new(ir.taps()),
            direct_path_index: ir.direct_path_index(),
            sample_rate: ir.sample_rate(),
        }
    }

    pub fn apply(&self, x: &Waveform, trim: TrimPolicy) -> Result<Waveform> {
        if x.sample_rate() != self.sample_rate {
            return Err(Error::SampleRateMismatch {
                expected: x.sample_rate(),
                got: self.sample_rate,
            });
        }
        if x.is_empty() {
            return Err(Error::EmptyInput("signal"));
        }
        let full = self.convolver.convolve(&x.to_f64());
        let out = match trim {
            TrimPolicy::Full => &full[..],
            TrimPolicy::SameLength => &full[self.direct_path_index..self.direct_path_index + x.len()],
        };
        Waveform::from_f64(out, x.sample_rate())
    }
}

/// Linear convolution of a waveform with a room response (FFT overlap-add).
pub fn convolve(x: &Waveform, h: &ImpulseResponse, trim: TrimPolicy) -> Result<Waveform> {
    Reverberator::new(h).apply(x, trim)
}

/// `10 log10(P_signal / P_noise)` over the full extent of both signals.
pub fn compute_snr(signal: &Waveform, noise: &Waveform) -> Result<f64> {
    snr_of(signal.samples(), noise.samples())
}

fn snr_of(signal: &[f32], noise: &[f32]) -> Result<f64> {
    if signal.is_empty() {
        return Err(Error::EmptyInput("signal"));
    }
    if noise.is_empty() {
        return Err(Error::EmptyInput("noise"));
    }
    let pn = mean_power(noise);
    if pn <= 0.0 {
        return Err(Error::ZeroPowerNoise);
    }
    let ps = mean_power(signal);
    if ps <= 0.0 {
        return Ok(SILENT_SNR_DB);
    }
    Ok((10.0 * (ps / pn).log10()).max(SILENT_SNR_DB))
}

/// Noise cyclically extended from `offset` to cover `len` samples.
pub fn noise_segment(noise: &[f32], offset: usize, len: usize) -> Vec<f32> {
    (0..len).map(|i| noise[(offset + i) % noise.len()]).collect()
}

/// Adds noise scaled by `alpha = sqrt(P_s / (P_n 10^(snr/10)))`.
pub fn mix_at_snr(reverbed: &Waveform, noise: &Waveform, target_snr_db: f64, offset: usize) -> Result<(Waveform, MixReport)> {
    if reverbed.sample_rate() != noise.sample_rate() {
        return Err(Error::SampleRateMismatch {
            expected: reverbed.sample_rate(),
            got: noise.sample_rate(),
        });
    }
    if reverbed.is_empty() {
        return Err(Error::EmptyInput("signal"));
    }
    if noise.is_empty() {
        return Err(Error::EmptyInput("noise"));
    }
    if !target_snr_db.is_finite() {
        return Err(Error::InvalidParameter("target SNR must be finite".into()));
    }
    let offset = offset % noise.len();
    let segment = noise_segment(noise.samples(), offset, reverbed.len());
    let pn = mean_power(&segment);
    if pn <= 0.0 {
        return Err(Error::ZeroPowerNoise);
    }
    let ps = mean_power(reverbed.samples());
    if ps <= 0.0 {
        return Err(Error::ZeroPowerSignal);
    }
    let alpha = (ps / (pn * 10f64.powf(target_snr_db / 10.0))).sqrt();
    let scaled: Vec<f32> = segment.iter().map(|&n| (alpha * n as f64) as f32).collect();
    let achieved_snr_db = snr_of(reverbed.samples(), &scaled)?;
    let mixed: Vec<f64> = reverbed
        .samples()
        .iter()
        .zip(&scaled)
        .map(|(&s, &n)| s as f64 + n as f64)
        .collect();
    Ok((
        Waveform::from_f64(&mixed, reverbed.sample_rate())?,
        MixReport {
            alpha,
            achieved_snr_db,
            noise_offset: offset,
        },
    ))
}

/// Per-utterance contamination driven by a shared spec.
///
/// The noise offset and SNR jitter of each utterance are drawn from a stream
/// seeded by `(noise_offset_seed, utterance_id)`, so results do not depend
/// on processing order.
#[derive(Debug, Clone)]
pub struct Contaminator {
    spec: ContaminationSpec,
    reverb: Reverberator,
}

impl Contaminator {
    pub fn new(spec: ContaminationSpec) -> Self {
        let reverb = Reverberator::new(&spec.ir);
        Self { spec, reverb }
    }

    pub fn spec(&self) -> &ContaminationSpec {
        &self.spec
    }

    pub fn contaminate(&self, utterance_id: &str, clean: &Waveform) -> Result<(Waveform, Option<MixReport>)> {
        self.spec.validate(clean.sample_rate())?;
        let reverbed = self.reverb.apply(clean, self.spec.trim)?;
        let Some(noise) = &self.spec.noise else {
            return Ok((reverbed, None));
        };
        let mut rng = rng::seeded(rng::derive_seed(self.spec.noise_offset_seed, utterance_id));
        let offset = rng.random_range(0..noise.len());
        let jitter = if self.spec.snr_jitter_db > 0.0 {
            rng.random_range(-self.spec.snr_jitter_db..=self.spec.snr_jitter_db)
        } else {
            0.0
        };
        let segment = noise_segment(noise.samples(), offset, reverbed.len());
        if mean_power(&segment) <= 0.0 {
            // A silent noise track contributes nothing: alpha = 0.
            let report = MixReport {
                alpha: 0.0,
                achieved_snr_db: f64::INFINITY,
                noise_offset: offset,
            };
            return Ok((reverbed, Some(report)));
        }
        let (mixed, report) = mix_at_snr(&reverbed, noise, self.spec.target_snr_db + jitter, offset)?;
        Ok((mixed, Some(report)))
    }
}
