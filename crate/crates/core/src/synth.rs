//! Synthetic phone corpus with construction-time labels, and pink noise.

use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::features::FrameSpec;
use crate::hmm::{state_id, Alignment, PhoneSet, SILENCE, STATES_PER_PHONE};
use crate::prelude::*;
use crate::{rng, Error, Result, Waveform, SAMPLE_RATE};

/// Sound of one synthetic phone: two sinusoids plus white noise. Both
/// frequencies glide linearly across the phone, from `f * (1 - glide / 2)`
/// to `f * (1 + glide / 2)`, so its beginning, middle and end differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhoneRecipe {
    pub f1: f64,
    pub f2: f64,
    pub a1: f64,
    pub a2: f64,
    pub glide: f64,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpusSpec {
    /// Phone inventory size including silence.
    pub num_phones: usize,
    pub utterances: usize,
    /// Inclusive range of phones per utterance, counting the leading and
    /// trailing silence.
    pub phones_per_utterance: (usize, usize),
    /// Inclusive phone duration range in seconds.
    pub duration: (f64, f64),
    /// Attack and decay of each phone's envelope in seconds.
    pub ramp: f64,
    /// Relative random perturbation of frequencies per token.
    pub frequency_jitter: f64,
    pub sample_rate: u32,
    /// Fixes the phone recipes; shared by every split of one corpus.
    pub seed: u64,
    /// Names the split and prefixes utterance ids; utterance content is
    /// drawn from `(seed, split, index)`.
    pub split: String,
}

impl Default for SyntheticCorpusSpec {
    fn default() -> Self {
        Self {
            num_phones: 10,
            utterances: 400,
            phones_per_utterance: (5, 15),
            duration: (0.060, 0.200),
            ramp: 0.010,
            frequency_jitter: 0.03,
            sample_rate: SAMPLE_RATE,
            seed: 0,
            split: "train".into(),
        }
    }
}

impl SyntheticCorpusSpec {
    pub fn split(&self, name: &str, utterances: usize) -> Self {
        Self {
            split: name.into(),
            utterances,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.num_phones < 2 {
            return bad("need silence plus at least one phone");
        }
        let (lo, hi) = self.phones_per_utterance;
        if lo < 3 || hi < lo {
            return bad("phones per utterance must be at least 3 (two silences and a phone)");
        }
        let frame = FrameSpec::default();
        let min_frames = frame.frame_count((self.duration.0 * self.sample_rate as f64) as usize, self.sample_rate);
        if !(self.duration.0 > 0.0 && self.duration.1 >= self.duration.0) || min_frames < STATES_PER_PHONE {
            return bad("phone durations must cover at least three frames");
        }
        if !(self.ramp >= 0.0 && 2.0 * self.ramp <= self.duration.0) {
            return bad("envelope ramps must fit in the shortest phone");
        }
        if !(0.0..0.2).contains(&self.frequency_jitter) {
            return bad("frequency jitter must lie in [0, 0.2)");
        }
        if self.sample_rate < 8000 {
            return bad("sample rate too low for the phone recipes");
        }
        Ok(())
    }

    pub fn phone_set(&self) -> PhoneSet {
        let mut symbols = vec![SILENCE.to_string()];
        symbols.extend((1..self.num_phones).map(|i| format!("p{i}")));
        PhoneSet::new(&symbols, SILENCE).expect("generated symbols are unique")
    }

    /// Recipes for every phone; index 0 is silence (noise only).
    pub fn recipes(&self) -> Vec<PhoneRecipe> {
        let mut r = rng::seeded(rng::derive_seed(self.seed, "phone-recipes"));
        let nyquist = self.sample_rate as f64 / 2.0;
        let n = self.num_phones - 1;
        let mut out = vec![PhoneRecipe {
            f1: 0.0,
            f2: 0.0,
            a1: 0.0,
            a2: 0.0,
            glide: 0.0,
            noise: 0.003,
        }];
        // Spread the first resonance over a log grid so phones stay distinct,
        // then shuffle which phone gets which slot.
        let mut slots: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            slots.swap(i, r.random_range(0..=i));
        }
        for slot in slots {
            let pos = (slot as f64 + r.random_range(0.2..0.8)) / n as f64;
            let f1 = 250.0 * (4.0f64).powf(pos);
            let f2 = (f1 * r.random_range(2.2..4.5)).min(0.7 * nyquist);
            out.push(PhoneRecipe {
                f1,
                f2,
                a1: r.random_range(0.15..0.3),
                a2: r.random_range(0.05..0.2),
                glide: if r.random::<bool>() { 1.0 } else { -1.0 } * r.random_range(0.2..0.4),
                noise: r.random_range(0.01..0.04),
            });
        }
        out
    }
}

/// One generated utterance with its construction-time annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticUtterance {
    pub id: String,
    pub audio: Waveform,
    pub phones: Vec<usize>,
    /// Sample boundaries of each phone (`phones.len() + 1` entries).
    pub boundaries: Vec<usize>,
    /// Per-frame HMM state of the default frontend.
    pub labels: Vec<u32>,
}

impl SyntheticUtterance {
    pub fn alignment(&self) -> Alignment {
        Alignment::new(self.id.clone(), self.labels.clone())
    }
}

/// Frame labels from phone boundaries: a frame belongs to the phone that
/// contains its center sample, and each phone's frames are split into three
/// equal runs for its states.
pub fn oracle_labels(phones: &[usize], boundaries: &[usize], frame: &FrameSpec, sample_rate: u32) -> Result<Vec<u32>> {
    let total = *boundaries.last().unwrap_or(&0);
    let n_frames = frame.frame_count(total, sample_rate);
    let hop = frame.hop_samples(sample_rate);
    let half = frame.frame_samples(sample_rate) / 2;
    let mut owner = Vec::with_capacity(n_frames);
    let mut k = 0;
    for t in 0..n_frames {
        let center = t * hop + half;
        while k + 1 < phones.len() && center >= boundaries[k + 1] {
            k += 1;
        }
        owner.push(k);
    }
    let mut labels = vec![0u32; n_frames];
    let mut start = 0;
    while start < n_frames {
        let k = owner[start];
        let mut end = start;
        while end < n_frames && owner[end] == k {
            end += 1;
        }
        let len = end - start;
        if len < STATES_PER_PHONE {
            return Err(Error::TooShortForPhone(len));
        }
        for t in start..end {
            labels[t] = state_id(phones[k], STATES_PER_PHONE * (t - start) / len) as u32;
        }
        start = end;
    }
    Ok(labels)
}

fn render_phone(recipe: &PhoneRecipe, len: usize, spec: &SyntheticCorpusSpec, r: &mut rng::Rng) -> Vec<f64> {
    let sr = spec.sample_rate as f64;
    let j = spec.frequency_jitter;
    let f1 = recipe.f1 * (1.0 + r.random_range(-j..=j));
    let f2 = recipe.f2 * (1.0 + r.random_range(-j..=j));
    let gain = r.random_range(0.8..1.2);
    let (p1, p2) = (r.random_range(0.0..2.0 * PI), r.random_range(0.0..2.0 * PI));
    let ramp = ((spec.ramp * sr) as usize).min(len / 2);
    let dur = len as f64 / sr;
    let g = recipe.glide;
    (0..len)
        .map(|i| {
            let t = i as f64 / sr;
            // Phase of a linear glide: integral of f * (1 + g * (t / dur - 1/2)).
            let warp = t + g * (t * t / (2.0 * dur) - t / 2.0);
            let env = if ramp == 0 {
                1.0
            } else if i < ramp {
                0.5 - 0.5 * (PI * i as f64 / ramp as f64).cos()
            } else if i >= len - ramp {
                0.5 - 0.5 * (PI * (len - 1 - i) as f64 / ramp as f64).cos()
            } else {
                1.0
            };
            let tone = recipe.a1 * (2.0 * PI * f1 * warp + p1).sin() + recipe.a2 * (2.0 * PI * f2 * warp + p2).sin();
            let z: f64 = StandardNormal.sample(r);
            env * gain * tone + recipe.noise * z
        })
        .collect()
}

fn generate_utterance(spec: &SyntheticCorpusSpec, recipes: &[PhoneRecipe], index: usize) -> Result<SyntheticUtterance> {
    let id = format!("{}-{index:05}", spec.split);
    let mut r = rng::seeded(rng::derive_seed(spec.seed, &id));
    let (lo, hi) = spec.phones_per_utterance;
    let count = r.random_range(lo..=hi);
    let mut phones = vec![0usize];
    while phones.len() + 1 < count {
        let prev = *phones.last().unwrap();
        let p = loop {
            let p = r.random_range(1..spec.num_phones);
            if p != prev || spec.num_phones == 2 {
                break p;
            }
        };
        phones.push(p);
    }
    phones.push(0);
    let sr = spec.sample_rate as f64;
    let mut samples = Vec::new();
    let mut boundaries = vec![0usize];
    for &p in &phones {
        let len = (r.random_range(spec.duration.0..=spec.duration.1) * sr).round() as usize;
        samples.extend(render_phone(&recipes[p], len, spec, &mut r));
        boundaries.push(samples.len());
    }
    let labels = oracle_labels(&phones, &boundaries, &FrameSpec::default(), spec.sample_rate)?;
    Ok(SyntheticUtterance {
        audio: Waveform::from_f64(&samples, spec.sample_rate)?,
        id,
        phones,
        boundaries,
        labels,
    })
}

/// Generates `spec.utterances` utterances: silence, a random phone string
/// without immediate repeats, silence.
pub fn synth_corpus(spec: &SyntheticCorpusSpec) -> Result<Vec<SyntheticUtterance>> {
    spec.validate()?;
    let recipes = spec.recipes();
    (0..spec.utterances).map(|i| generate_utterance(spec, &recipes, i)).collect()
}

/// Seeded pink (1/f power) noise with unit RMS, using a sum of first-order
/// filtered white-noise sources.
pub fn pink_noise(len: usize, sample_rate: u32, seed: u64) -> Result<Waveform> {
    // Paul Kellet's economy filter bank.
    const POLES: [f64; 3] = [0.99765, 0.96300, 0.57000];
    const GAINS: [f64; 3] = [0.0990460, 0.2965164, 1.0526913];
    let mut r = rng::seeded(seed);
    let mut state = [0.0f64; 3];
    let mut out: Vec<f64> = (0..len)
        .map(|_| {
            let w: f64 = StandardNormal.sample(&mut r);
            let mut y = 0.1848 * w;
            for k in 0..3 {
                state[k] = POLES[k] * state[k] + GAINS[k] * w;
                y += state[k];
            }
            y
        })
        .collect();
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / len.max(1) as f64).sqrt();
    if rms > 0.0 {
        for v in out.iter_mut() {
            *v /= rms;
        }
    }
    Waveform::from_f64(&out, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Frontend;

    fn small() -> SyntheticCorpusSpec {
        SyntheticCorpusSpec {
            utterances: 12,
            ..Default::default()
        }
    }

    #[test]
    fn labels_match_frontend_frames() {
        let fe = Frontend::default();
        for u in synth_corpus(&small()).unwrap() {
            assert_eq!(u.labels.len(), fe.base_features(&u.audio).unwrap().rows(), "{}", u.id);
            assert!(u.alignment().is_legal_for(&u.phones));
            assert_eq!(u.phones.first(), Some(&0));
            assert_eq!(u.phones.last(), Some(&0));
            assert!(u.phones.windows(2).all(|w| w[0] != w[1]));
        }
    }

    #[test]
    fn deterministic_and_bounded() {
        let a = synth_corpus(&small()).unwrap();
        assert_eq!(a, synth_corpus(&small()).unwrap());
        for u in &a {
            assert!((5..=15).contains(&u.phones.len()));
            for w in u.boundaries.windows(2) {
                let d = (w[1] - w[0]) as f64 / 16000.0;
                assert!((0.06 - 1e-9..=0.2 + 1e-9).contains(&d), "{d}");
            }
        }
        let other = synth_corpus(&small().split("test", 12)).unwrap();
        assert_ne!(a[0].audio, other[0].audio);
    }

    #[test]
    fn recipes_below_nyquist_and_distinct() {
        let r = small().recipes();
        assert_eq!(r.len(), 10);
        let mut f1: Vec<f64> = r[1..].iter().map(|p| p.f1).collect();
        f1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(f1.windows(2).all(|w| w[1] > w[0] * 1.03));
        assert!(r.iter().all(|p| p.f2 * (1.0 + p.glide.abs() / 2.0) < 8000.0));
    }

    #[test]
    fn oracle_thirds() {
        // Frame centers sit at 200 + 160 t, so the first phone owns 9 frames.
        let b = [0, 1600, 3200, 4800];
        let l = oracle_labels(&[0, 2, 0], &b, &FrameSpec::default(), 16000).unwrap();
        assert_eq!(l.len(), 28);
        assert_eq!(&l[..10], &[0, 0, 0, 1, 1, 1, 2, 2, 2, 6]);
    }

    #[test]
    fn pink_noise_spectrum_tilts() {
        let n = pink_noise(1 << 16, 16000, 1).unwrap();
        let x = n.to_f64();
        let fft = crate::fft::Fft::new(1 << 16);
        let spec = fft.forward_real(&x);
        let band = |lo: usize, hi: usize| spec[lo..hi].iter().map(|c| c.norm_sqr()).sum::<f64>() / (hi - lo) as f64;
        // Power per bin should fall roughly 10 dB per decade.
        let low = band(400, 800);
        let high = band(4000, 8000);
        let drop = 10.0 * (low / high).log10();
        assert!((7.0..13.0).contains(&drop), "{drop}");
        assert!((crate::linalg::mean_power(n.samples()) - 1.0).abs() < 1e-3);
    }
}
