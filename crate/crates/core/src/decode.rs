//! Hybrid phone-loop Viterbi decoding over network posteriors.

use crate::hmm::{phone_of_state, position_of_state, state_id, STATES_PER_PHONE};
use crate::linalg::Matrix;
use crate::prelude::*;
use crate::{Error, Result};

/// Posteriors below this are treated as this value before taking logs.
const POSTERIOR_FLOOR: f64 = 1e-30;

/// `scale * (log p(s|o) - log P(s))` for every frame and state.
pub fn posteriors_to_loglik(posteriors: &Matrix<f32>, priors: &[f64], acoustic_scale: f64) -> Result<Matrix<f64>> {
    if priors.len() != posteriors.cols() {
        return Err(Error::DimensionMismatch {
            expected: posteriors.cols(),
            got: priors.len(),
        });
    }
    if let Some(i) = priors.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::ZeroPrior(i));
    }
    let log_priors: Vec<f64> = priors.iter().map(|p| p.ln()).collect();
    let data = (0..posteriors.rows())
        .flat_map(|r| {
            posteriors
                .row(r)
                .iter()
                .zip(&log_priors)
                .map(|(&p, lp)| acoustic_scale * ((p as f64).max(POSTERIOR_FLOOR).ln() - lp))
                .collect::<Vec<_>>()
        })
        .collect();
    Matrix::new(posteriors.rows(), posteriors.cols(), data)
}

/// Free phone loop: any phone may follow any other with equal probability.
#[derive(Debug, Clone, PartialEq)]
pub struct PhoneLoopGraph {
    num_phones: usize,
    self_loop: Vec<f64>,
    insertion_penalty: f64,
}

impl PhoneLoopGraph {
    /// Self-loop and forward probability 0.5 everywhere, no insertion penalty.
    pub fn new(num_phones: usize) -> Result<Self> {
        if num_phones == 0 {
            return Err(Error::InvalidParameter("phone loop needs at least one phone".into()));
        }
        Ok(Self {
            num_phones,
            self_loop: vec![0.5; num_phones * STATES_PER_PHONE],
            insertion_penalty: 0.0,
        })
    }

    pub fn with_self_loop(mut self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("self-loop probability {p} outside (0, 1)")));
        }
        self.self_loop.fill(p);
        Ok(self)
    }

    /// Log-domain penalty subtracted at every phone entry.
    pub fn with_insertion_penalty(mut self, penalty: f64) -> Self {
        self.insertion_penalty = penalty;
        self
    }

    pub fn num_phones(&self) -> usize {
        self.num_phones
    }

    pub fn num_states(&self) -> usize {
        self.num_phones * STATES_PER_PHONE
    }

    pub fn insertion_penalty(&self) -> f64 {
        self.insertion_penalty
    }

    pub fn self_loop(&self, state: usize) -> f64 {
        self.self_loop[state]
    }
}

const NO_STATE: u32 = u32::MAX;

/// Viterbi best phone sequence through the loop. The path starts by
/// entering a phone and ends in the last state of one.
pub fn phone_loop_decode(loglik: &Matrix<f64>, graph: &PhoneLoopGraph) -> Result<Vec<usize>> {
    let s_len = graph.num_states();
    if loglik.cols() != s_len {
        return Err(Error::DimensionMismatch {
            expected: s_len,
            got: loglik.cols(),
        });
    }
    let t_len = loglik.rows();
    if t_len < STATES_PER_PHONE {
        return Err(Error::TooShortForPhone(t_len));
    }
    let n = graph.num_phones;
    let entry = -(n as f64).ln() - graph.insertion_penalty;
    let log_stay: Vec<f64> = graph.self_loop.iter().map(|p| p.ln()).collect();
    let log_move: Vec<f64> = graph.self_loop.iter().map(|p| (1.0 - p).ln()).collect();

    // back[t * s_len + s] is the predecessor state at t - 1, or NO_STATE for
    // the initial phone entry.
    let mut back = vec![NO_STATE; t_len * s_len];
    let mut delta: Vec<f64> = (0..s_len)
        .map(|s| {
            if position_of_state(s) == 0 {
                entry + loglik.row(0)[s]
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let mut next = vec![f64::NEG_INFINITY; s_len];
    for t in 1..t_len {
        // Best phone exit at t - 1 feeds every phone entry at t.
        let mut exit = (f64::NEG_INFINITY, NO_STATE);
        for p in 0..n {
            let last = state_id(p, STATES_PER_PHONE - 1);
            let v = delta[last] + log_move[last];
            if v > exit.0 {
                exit = (v, last as u32);
            }
        }
        let row = loglik.row(t);
        for s in 0..s_len {
            let stay = delta[s] + log_stay[s];
            let (best, from) = if position_of_state(s) == 0 {
                let enter = exit.0 + entry;
                if enter > stay {
                    (enter, exit.1)
                } else {
                    (stay, s as u32)
                }
            } else {
                let mv = delta[s - 1] + log_move[s - 1];
                if mv > stay {
                    (mv, (s - 1) as u32)
                } else {
                    (stay, s as u32)
                }
            };
            next[s] = best + row[s];
            back[t * s_len + s] = from;
        }
        core::mem::swap(&mut delta, &mut next);
    }
    let mut end = (f64::NEG_INFINITY, usize::MAX);
    for p in 0..n {
        let last = state_id(p, STATES_PER_PHONE - 1);
        let v = delta[last] + log_move[last];
        if v > end.0 {
            end = (v, last);
        }
    }
    if end.1 == usize::MAX {
        return Err(Error::InvalidParameter("no finite decoding path".into()));
    }
    let mut phones = Vec::new();
    let mut s = end.1;
    for t in (0..t_len).rev() {
        let prev = back[t * s_len + s];
        let entered = t == 0 || (position_of_state(s) == 0 && prev as usize != s);
        if entered {
            phones.push(phone_of_state(s));
        }
        if t > 0 {
            s = prev as usize;
        }
    }
    phones.reverse();
    Ok(phones)
}
