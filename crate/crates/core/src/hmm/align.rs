use super::{expand_transcript, Alignment, GmmAcousticModel};
use crate::features::FeatureMatrix;
use crate::prelude::*;
use crate::{Error, Result};

/// Largest frame-count difference `transfer_alignment` will absorb.
pub const MAX_TRANSFER_DRIFT: usize = 5;

/// Best path through a state expansion. Returns the expansion position of
/// every frame and the path score (emissions, transitions and the final
/// exit transition).
pub(crate) fn viterbi(
    model: &GmmAcousticModel,
    features: &FeatureMatrix,
    expansion: &[usize],
) -> Result<(Vec<usize>, f64)> {
    let t_len = features.rows();
    let s_len = expansion.len();
    if s_len == 0 {
        return Err(Error::EmptyInput("transcript"));
    }
    if features.cols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: features.cols(),
        });
    }
    if t_len < s_len {
        return Err(Error::TooShortForTranscript {
            frames: t_len,
            states: s_len,
        });
    }

    // Emission scores, computed once per distinct state.
    let mut column_of = vec![usize::MAX; model.num_states()];
    let mut distinct = Vec::new();
    for &s in expansion {
        if column_of[s] == usize::MAX {
            column_of[s] = distinct.len();
            distinct.push(s);
        }
    }
    let nd = distinct.len();
    let mut emit = vec![0.0f64; t_len * nd];
    for t in 0..t_len {
        let x = features.row(t);
        for (k, &s) in distinct.iter().enumerate() {
            emit[t * nd + k] = model.state(s).max_log_likelihood(x);
        }
    }

    let topo = model.topology();
    let log_stay: Vec<f64> = expansion.iter().map(|&s| topo.self_loop(s).ln()).collect();
    let log_move: Vec<f64> = expansion.iter().map(|&s| topo.forward(s).ln()).collect();

    let mut delta = vec![f64::NEG_INFINITY; s_len];
    let mut next = vec![f64::NEG_INFINITY; s_len];
    let mut advanced = vec![false; t_len * s_len];
    delta[0] = emit[column_of[expansion[0]]];
    for t in 1..t_len {
        // Position j is reachable at frame t only if j <= t, and must still
        // be able to reach the end in the frames that remain.
        let lo = (s_len + t).saturating_sub(t_len);
        let hi = t.min(s_len - 1);
        next.fill(f64::NEG_INFINITY);
        for j in lo..=hi {
            let stay = delta[j] + log_stay[j];
            let mv = if j > 0 { delta[j - 1] + log_move[j - 1] } else { f64::NEG_INFINITY };
            let (best, adv) = if mv > stay { (mv, true) } else { (stay, false) };
            next[j] = best + emit[t * nd + column_of[expansion[j]]];
            advanced[t * s_len + j] = adv;
        }
        core::mem::swap(&mut delta, &mut next);
    }
    let score = delta[s_len - 1] + log_move[s_len - 1];
    if !score.is_finite() {
        return Err(Error::InvalidParameter("no finite alignment path".into()));
    }
    let mut path = vec![0usize; t_len];
    let mut j = s_len - 1;
    for t in (0..t_len).rev() {
        path[t] = j;
        if t > 0 && advanced[t * s_len + j] {
            j -= 1;
        }
    }
    Ok((path, score))
}

/// Viterbi forced alignment of `features` to the left-to-right expansion of
/// `transcript` (phone indices).
pub fn force_align(model: &GmmAcousticModel, features: &FeatureMatrix, transcript: &[usize]) -> Result<Alignment> {
    let expansion = expand_transcript(transcript);
    let (path, _) = viterbi(model, features, &expansion)?;
    Ok(Alignment::new(String::new(), path.iter().map(|&j| expansion[j] as u32).collect()))
}

/// Log score of the best forced-alignment path.
pub fn viterbi_score(model: &GmmAcousticModel, features: &FeatureMatrix, transcript: &[usize]) -> Result<f64> {
    viterbi(model, features, &expand_transcript(transcript)).map(|(_, s)| s)
}

/// Result of carrying a clean alignment over to distant features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transferred {
    pub alignment: Alignment,
    /// Frames appended (positive) or truncated (negative).
    pub adjusted: isize,
}

/// Reuses clean-speech labels for the contaminated copy of the same
/// utterance. Small length differences are absorbed by truncating or by
/// repeating the last label.
pub fn transfer_alignment(clean: &Alignment, distant_frames: usize) -> Result<Transferred> {
    let n = clean.len();
    if n == 0 {
        return Err(Error::EmptyInput("alignment"));
    }
    if n.abs_diff(distant_frames) > MAX_TRANSFER_DRIFT {
        return Err(Error::TimeBaseMismatch {
            clean: n,
            distant: distant_frames,
        });
    }
    let mut states = clean.states.clone();
    let last = states[n - 1];
    states.resize(distant_frames, last);
    Ok(Transferred {
        alignment: Alignment::new(clean.utterance_id.clone(), states),
        adjusted: distant_frames as isize - n as isize,
    })
}
