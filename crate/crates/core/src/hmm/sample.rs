use super::{expand_transcript, GmmAcousticModel};
use crate::features::FeatureMatrix;
use crate::prelude::*;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Draws a feature sequence from the model along the expansion of
/// `transcript`. Durations follow the self-loop probabilities; returns the
/// features and the true per-frame state ids.
pub fn sample_utterance<R: Rng + ?Sized>(
    model: &GmmAcousticModel,
    transcript: &[usize],
    rng: &mut R,
) -> Result<(FeatureMatrix, Vec<u32>)> {
    if transcript.is_empty() {
        return Err(Error::EmptyInput("transcript"));
    }
    let dim = model.dim();
    let mut data = Vec::new();
    let mut states = Vec::new();
    for s in expand_transcript(transcript) {
        let gmm = model.state(s);
        let stay = model.topology().self_loop(s);
        loop {
            let u: f64 = rng.random();
            let mut c = 0;
            let mut acc = gmm.weights()[0];
            while u >= acc && c + 1 < gmm.num_components() {
                c += 1;
                acc += gmm.weights()[c];
            }
            for (m, v) in gmm.mean(c).iter().zip(gmm.variance(c)) {
                let z: f64 = StandardNormal.sample(rng);
                data.push((m + v.sqrt() * z) as f32);
            }
            states.push(s as u32);
            if rng.random::<f64>() >= stay {
                break;
            }
        }
    }
    let rows = states.len();
    Ok((FeatureMatrix::new(rows, dim, data)?, states))
}
