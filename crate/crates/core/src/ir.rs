//! Impulse-response lab: exponential sine sweeps, deconvolution of sweep
//! recordings, synthetic exponentially decaying responses and Schroeder
//! T60 estimation.

use core::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::fft::{fft_convolve, Fft};
use crate::prelude::*;
use crate::{rng, Error, Result, Waveform};

/// ln(10^3): amplitude decay constant that yields 60 dB of energy decay.
pub const DECAY_60DB: f64 = 6.907_755_278_982_137;

/// Relative Tikhonov term used when inverting the sweep spectrum.
const DECONV_REGULARIZATION: f64 = 1e-10;

/// Direct-to-reverberant energy ratio of [`synth_ir`] responses.
pub const DEFAULT_DRR_DB: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub f_start: f64,
    pub f_end: f64,
    pub duration: f64,
    pub amplitude: f64,
    pub sample_rate: u32,
}

impl SweepSpec {
    pub fn new(f_start: f64, f_end: f64, duration: f64, amplitude: f64, sample_rate: u32) -> Result<Self> {
        let spec = Self { f_start, f_end, duration, amplitude, sample_rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        if !(self.f_start > 0.0 && self.f_start < self.f_end && self.f_end < nyquist) {
            return Err(Error::InvalidParameter(format!(
                "sweep band must satisfy 0 < f_start < f_end < {nyquist} Hz (got {}..{})",
                self.f_start, self.f_end
            )));
        }
        if !(self.duration > 0.0) || self.len() < 2 {
            return Err(Error::InvalidParameter("sweep duration must be positive".into()));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(Error::InvalidParameter("sweep amplitude must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Sweep length in samples.
    pub fn len(&self) -> usize {
        (self.duration * self.sample_rate as f64).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn log_ratio(&self) -> f64 {
        (self.f_end / self.f_start).ln()
    }

    /// Phase of the sweep at time `t` seconds.
    pub fn phase(&self, t: f64) -> f64 {
        let l = self.log_ratio();
        2.0 * PI * self.f_start * self.duration / l * ((t * l / self.duration).exp() - 1.0)
    }

    /// Analytic instantaneous frequency in Hz at time `t`.
    pub fn instantaneous_frequency(&self, t: f64) -> f64 {
        self.f_start * (t * self.log_ratio() / self.duration).exp()
    }
}

impl Default for SweepSpec {
    /// 20 Hz to 7.9 kHz over 10 s at 16 kHz, amplitude 0.5.
    fn default() -> Self {
        Self {
            f_start: 20.0,
            f_end: 7_900.0,
            duration: 10.0,
            amplitude: 0.5,
            sample_rate: crate::SAMPLE_RATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    taps: Vec<f64>,
    sample_rate: u32,
    direct_path_index: usize,
}

impl ImpulseResponse {
    /// The direct path is taken to be the maximum-magnitude tap.
    pub fn new(taps: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::check(&taps, sample_rate)?;
        let direct_path_index = peak_index(&taps);
        Ok(Self { taps, sample_rate, direct_path_index })
    }

    /// Restores a response whose direct path was recorded separately.
    pub fn with_direct_path(taps: Vec<f64>, sample_rate: u32, direct_path_index: usize) -> Result<Self> {
        Self::check(&taps, sample_rate)?;
        if direct_path_index >= taps.len() {
            return Err(Error::InvalidParameter(format!(
                "direct path index {direct_path_index} outside response of {} taps",
                taps.len()
            )));
        }
        Ok(Self { taps, sample_rate, direct_path_index })
    }

    /// Unit pulse at `delay`.
    pub fn unit_pulse(delay: usize, sample_rate: u32) -> Self {
        let mut taps = vec![0.0; delay + 1];
        taps[delay] = 1.0;
        Self { taps, sample_rate, direct_path_index: delay }
    }

    fn check(taps: &[f64], sample_rate: u32) -> Result<()> {
        if taps.is_empty() {
            return Err(Error::EmptyInput("impulse response"));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        if let Some(i) = taps.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn direct_path_index(&self) -> usize {
        self.direct_path_index
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrAnalysis {
    pub t60: f64,
    /// Energy decay curve in dB, one value per tap.
    pub edc: Vec<f64>,
    /// Upper and lower EDC levels of the line fit, in dB.
    pub fit_range: (f64, f64),
}

fn peak_index(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    best
}

/// Exponential sine sweep `A sin(2 pi f1 T / L (exp(t L / T) - 1))`,
/// `L = ln(f2 / f1)`.
pub fn generate_ess(spec: &SweepSpec) -> Result<Waveform> {
    spec.validate()?;
    Waveform::from_f64(&ess_samples(spec), spec.sample_rate)
}

fn ess_samples(spec: &SweepSpec) -> Vec<f64> {
    let sr = spec.sample_rate as f64;
    (0..spec.len())
        .map(|i| spec.amplitude * spec.phase(i as f64 / sr).sin())
        .collect()
}

/// Time-reversed sweep with a -6 dB/octave envelope along the reversed time
/// axis, scaled so that `sweep (*) inverse` peaks at exactly 1.
///
/// The peak of the compressed pulse sits at index `len - 1`.
pub fn inverse_filter(spec: &SweepSpec) -> Result<Waveform> {
    spec.validate()?;
    Waveform::from_f64(&inverse_samples(spec), spec.sample_rate)
}

fn inverse_samples(spec: &SweepSpec) -> Vec<f64> {
    let sweep = ess_samples(spec);
    let sr = spec.sample_rate as f64;
    let l = spec.log_ratio();
    let n = sweep.len();
    let mut inv: Vec<f64> = (0..n)
        .map(|i| sweep[n - 1 - i] * (-(i as f64 / sr) * l / spec.duration).exp())
        .collect();
    let pulse = fft_convolve(&sweep, &inv);
    let peak = pulse[peak_index(&pulse)].abs();
    for v in inv.iter_mut() {
        *v /= peak;
    }
    inv
}

/// Recovers the channel response from a recording of the sweep.
///
/// The recording is deconvolved with the regularized spectral inverse of the
/// sweep, which is exact over the whole band the sweep excites (the
/// magnitude-compensated time-reversed filter of [`inverse_filter`] leaves a
/// few percent of band-edge ripple). The returned window starts at the
/// strongest deconvolved tap.
pub fn estimate_ir(recording: &Waveform, spec: &SweepSpec, ir_length: usize) -> Result<ImpulseResponse> {
    spec.validate()?;
    if recording.sample_rate() != spec.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: spec.sample_rate,
            got: recording.sample_rate(),
        });
    }
    if ir_length == 0 {
        return Err(Error::InvalidParameter("ir_length must be positive".into()));
    }
    let sweep = ess_samples(spec);
    if recording.len() < sweep.len() {
        return Err(Error::RecordingTooShort {
            recording: recording.len(),
            sweep: sweep.len(),
        });
    }
    let n = (recording.len() + sweep.len()).next_power_of_two();
    let fft = Fft::new(n);
    let sweep_spec = fft.forward_real(&sweep);
    let mut rec_spec = fft.forward_real(&recording.to_f64());
    let max_power = sweep_spec.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
    let eps = DECONV_REGULARIZATION * max_power;
    for (y, x) in rec_spec.iter_mut().zip(&sweep_spec) {
        *y = *y * x.conj() / Complex64::new(x.norm_sqr() + eps, 0.0);
    }
    fft.inverse(&mut rec_spec);
    let deconvolved: Vec<f64> = rec_spec.iter().map(|c| c.re).collect();
    let peak = peak_index(&deconvolved);
    if deconvolved[peak].abs() < 1e-6 {
        return Err(Error::SilentRecording);
    }
    let taps: Vec<f64> = (0..ir_length)
        .map(|i| deconvolved.get(peak + i).copied().unwrap_or(0.0))
        .collect();
    ImpulseResponse::with_direct_path(taps, spec.sample_rate, 0)
}

/// Parameters of a synthetic room response: a unit direct path followed by
/// exponentially decaying Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthIrSpec {
    pub t60: f64,
    pub length: usize,
    pub sample_rate: u32,
    pub direct_delay: usize,
    /// Expected direct-to-reverberant energy ratio; sets the tail gain.
    pub drr_db: f64,
    pub seed: u64,
}

/// Synthetic response with the default direct-to-reverberant ratio.
pub fn synth_ir(t60: f64, length: usize, sample_rate: u32, direct_delay: usize, seed: u64) -> Result<ImpulseResponse> {
    synth_ir_with(&SynthIrSpec {
        t60,
        length,
        sample_rate,
        direct_delay,
        drr_db: DEFAULT_DRR_DB,
        seed,
    })
}

/// Taps are zero before the direct path, 1 at it, and
/// `g * N(0, 1) * exp(-6.91 t / t60)` after it, with `t` measured from the
/// direct path and `g` chosen so the expected tail energy matches `drr_db`.
pub fn synth_ir_with(spec: &SynthIrSpec) -> Result<ImpulseResponse> {
    if !(spec.t60 > 0.0 && spec.t60.is_finite()) {
        return Err(Error::InvalidParameter("t60 must be positive".into()));
    }
    if spec.direct_delay >= spec.length {
        return Err(Error::InvalidParameter(format!(
            "direct delay {} must be below length {}",
            spec.direct_delay, spec.length
        )));
    }
    let sr = spec.sample_rate as f64;
    let rate = DECAY_60DB / (spec.t60 * sr);
    let tail_len = spec.length - spec.direct_delay - 1;
    let expected_tail_energy: f64 = (1..=tail_len).map(|k| (-2.0 * rate * k as f64).exp()).sum();
    let gain = if expected_tail_energy > 0.0 {
        (10f64.powf(-spec.drr_db / 10.0) / expected_tail_energy).sqrt()
    } else {
        0.0
    };
    let mut rng = rng::seeded(spec.seed);
    let mut taps = vec![0.0; spec.length];
    taps[spec.direct_delay] = 1.0;
    for k in 1..=tail_len {
        let z: f64 = StandardNormal.sample(&mut rng);
        taps[spec.direct_delay + k] = gain * z * (-rate * k as f64).exp();
    }
    ImpulseResponse::new(taps, spec.sample_rate)
}

/// Schroeder energy decay curve in dB; floored at -300 dB.
pub fn energy_decay_curve(taps: &[f64]) -> Vec<f64> {
    let mut tail = vec![0.0; taps.len()];
    let mut acc = 0.0;
    for (i, &h) in taps.iter().enumerate().rev() {
        acc += h * h;
        tail[i] = acc;
    }
    let total = acc;
    tail.iter()
        .map(|&e| {
            if total > 0.0 && e > 0.0 {
                (10.0 * (e / total).log10()).max(-300.0)
            } else {
                -300.0
            }
        })
        .collect()
}

/// T60 from a least-squares line through the EDC between -5 and -25 dB,
/// extrapolated to 60 dB of decay.
pub fn estimate_t60(ir: &ImpulseResponse) -> Result<IrAnalysis> {
    const UPPER: f64 = -5.0;
    const LOWER: f64 = -25.0;
    let nonzero = ir.taps().iter().filter(|&&t| t != 0.0).count();
    if nonzero < 2 {
        return Err(Error::InsufficientDecay);
    }
    let edc = energy_decay_curve(ir.taps());
    if !edc.iter().any(|&v| v <= LOWER) {
        return Err(Error::InsufficientDecay);
    }
    let sr = ir.sample_rate() as f64;
    let (mut n, mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &v) in edc.iter().enumerate() {
        if v <= UPPER && v >= LOWER {
            let t = i as f64 / sr;
            n += 1.0;
            st += t;
            sy += v;
            stt += t * t;
            sty += t * v;
        }
    }
    let denom = n * stt - st * st;
    if n < 2.0 || denom <= 0.0 {
        return Err(Error::InsufficientDecay);
    }
    let slope = (n * sty - st * sy) / denom;
    if !(slope < 0.0) {
        return Err(Error::InsufficientDecay);
    }
    Ok(IrAnalysis {
        t60: -60.0 / slope,
        edc,
        fit_range: (UPPER, LOWER),
    })
}
