//! Monophone GMM-HMM aligner: three-state left-to-right phone models with
//! diagonal-covariance mixtures, flat-start Viterbi EM and forced alignment.

mod align;
mod gmm;
mod sample;
mod train;

pub use align::{force_align, transfer_alignment, viterbi_score, Transferred, MAX_TRANSFER_DRIFT};
pub use gmm::{DiagGmm, GmmAcousticModel, VARIANCE_FLOOR};
pub use sample::sample_utterance;
pub use train::{align_corpus, em_train, flat_start, EmConfig, EmOutcome};

use crate::features::FeatureMatrix;
use crate::prelude::*;
use crate::{Error, Result};

pub const STATES_PER_PHONE: usize = 3;
pub const SILENCE: &str = "sil";

/// Ordered phone inventory; the silence symbol is mandatory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneSet {
    symbols: Vec<String>,
    silence: usize,
}

impl PhoneSet {
    pub fn new<S: AsRef<str>>(symbols: &[S], silence: &str) -> Result<Self> {
        let symbols: Vec<String> = symbols.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(Error::InvalidParameter(format!("bad phone symbol {s:?}")));
            }
            if symbols[..i].contains(s) {
                return Err(Error::InvalidParameter(format!("duplicate phone symbol {s:?}")));
            }
        }
        let silence = symbols
            .iter()
            .position(|s| s == silence)
            .ok_or_else(|| Error::InvalidParameter(format!("silence symbol {silence:?} missing from phone set")))?;
        Ok(Self { symbols, silence })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn silence(&self) -> usize {
        self.silence
    }

    pub fn index(&self, symbol: &str) -> Result<usize> {
        self.symbols
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| Error::UnknownPhone(symbol.to_string()))
    }

    /// Whitespace-separated phone string to indices.
    pub fn parse(&self, transcript: &str) -> Result<Vec<usize>> {
        transcript.split_whitespace().map(|s| self.index(s)).collect()
    }

    pub fn render(&self, phones: &[usize]) -> String {
        let parts: Vec<&str> = phones.iter().map(|&p| self.symbol(p)).collect();
        parts.join(" ")
    }

    pub fn num_states(&self) -> usize {
        self.len() * STATES_PER_PHONE
    }
}

pub fn state_id(phone: usize, position: usize) -> usize {
    phone * STATES_PER_PHONE + position
}

pub fn phone_of_state(state: usize) -> usize {
    state / STATES_PER_PHONE
}

pub fn position_of_state(state: usize) -> usize {
    state % STATES_PER_PHONE
}

/// Left-to-right transition structure: each state either loops or moves to
/// the next state (the last state of a phone moves to the first state of the
/// next phone, or exits). Only the self-loop probability is stored; the
/// forward probability is its complement.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmTopology {
    self_loop: Vec<f64>,
}

/// Transition probabilities are kept inside `[MIN_TRANSITION, 1 - MIN_TRANSITION]`.
pub const MIN_TRANSITION: f64 = 1e-3;

impl HmmTopology {
    pub fn uniform(num_states: usize, self_loop: f64) -> Result<Self> {
        Self::new(vec![self_loop; num_states])
    }

    pub fn new(self_loop: Vec<f64>) -> Result<Self> {
        if self_loop.iter().any(|p| !(MIN_TRANSITION..=1.0 - MIN_TRANSITION).contains(p)) {
            return Err(Error::InvalidParameter(format!(
                "self-loop probabilities must lie in [{MIN_TRANSITION}, {}]",
                1.0 - MIN_TRANSITION
            )));
        }
        Ok(Self { self_loop })
    }

    pub fn num_states(&self) -> usize {
        self.self_loop.len()
    }

    pub fn self_loop(&self, state: usize) -> f64 {
        self.self_loop[state]
    }

    pub fn forward(&self, state: usize) -> f64 {
        1.0 - self.self_loop[state]
    }

    pub fn self_loops(&self) -> &[f64] {
        &self.self_loop
    }

    /// Maximum-likelihood update from path counts, clamped to the allowed
    /// range; states without visits keep their probability.
    pub(crate) fn reestimate(&mut self, stay: &[f64], leave: &[f64]) {
        for (s, p) in self.self_loop.iter_mut().enumerate() {
            let total = stay[s] + leave[s];
            if total > 0.0 {
                *p = (stay[s] / total).clamp(MIN_TRANSITION, 1.0 - MIN_TRANSITION);
            }
        }
    }
}

/// Expands a phone transcript into its HMM state sequence.
pub fn expand_transcript(transcript: &[usize]) -> Vec<usize> {
    transcript
        .iter()
        .flat_map(|&p| (0..STATES_PER_PHONE).map(move |k| state_id(p, k)))
        .collect()
}

/// Per-frame HMM state ids for one utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub utterance_id: String,
    pub states: Vec<u32>,
}

impl Alignment {
    pub fn new(utterance_id: impl Into<String>, states: Vec<u32>) -> Self {
        Self {
            utterance_id: utterance_id.into(),
            states,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Collapses the state path into the phone sequence it traverses.
    pub fn phones(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut prev: Option<usize> = None;
        for &s in &self.states {
            let s = s as usize;
            let start_of_phone = match prev {
                None => true,
                Some(p) => s != p && position_of_state(s) == 0,
            };
            if start_of_phone {
                out.push(phone_of_state(s));
            }
            prev = Some(s);
        }
        out
    }

    /// True when the path walks the expansion of `transcript` left to right,
    /// visiting every state at least once and ending in the final state.
    pub fn is_legal_for(&self, transcript: &[usize]) -> bool {
        let expansion = expand_transcript(transcript);
        if expansion.is_empty() || self.states.is_empty() {
            return false;
        }
        let mut pos = 0usize;
        if self.states[0] as usize != expansion[0] {
            return false;
        }
        for &s in &self.states[1..] {
            let s = s as usize;
            if s == expansion[pos] {
                continue;
            }
            if pos + 1 < expansion.len() && s == expansion[pos + 1] {
                pos += 1;
            } else {
                return false;
            }
        }
        pos + 1 == expansion.len()
    }
}

/// A transcribed utterance with its (unspliced) features.
#[derive(Debug, Clone, Copy)]
pub struct Utterance<'a> {
    pub id: &'a str,
    pub features: &'a FeatureMatrix,
    pub transcript: &'a [usize],
}
