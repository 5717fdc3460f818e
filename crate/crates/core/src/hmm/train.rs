use super::align::viterbi;
use super::{expand_transcript, Alignment, DiagGmm, GmmAcousticModel, HmmTopology, PhoneSet, Utterance};
use crate::prelude::*;
use crate::{Error, Result};

/// Viterbi-EM schedule: number of iterations and, for each mixup step, the
/// iteration after which states grow to the given number of components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmConfig {
    pub iterations: usize,
    pub mixup: Vec<(usize, usize)>,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            mixup: vec![(2, 2), (4, 3), (6, 4)],
        }
    }
}

impl EmConfig {
    pub fn without_mixup(iterations: usize) -> Self {
        Self {
            iterations,
            mixup: Vec::new(),
        }
    }

    /// Grows by one component every other iteration, up to `max_components`.
    pub fn growing(iterations: usize, max_components: usize) -> Self {
        let mixup = (2..=max_components)
            .map(|m| (2 * (m - 1), m))
            .filter(|&(it, _)| it < iterations)
            .collect();
        Self { iterations, mixup }
    }

    fn mixup_target(&self, iteration: usize) -> Option<usize> {
        self.mixup.iter().rev().find(|(it, _)| *it == iteration).map(|&(_, m)| m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmOutcome {
    pub model: GmmAcousticModel,
    /// Corpus Viterbi score of the model after `k` re-estimations, for
    /// `k = 0..=iterations` (empty when no iteration ran).
    pub log_likelihood: Vec<f64>,
}

/// Sufficient statistics of one Gaussian component.
#[derive(Debug, Clone)]
struct Moments {
    count: f64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self {
            count: 0.0,
            sum: vec![0.0; dim],
            sum_sq: vec![0.0; dim],
        }
    }

    fn add(&mut self, x: &[f32]) {
        self.count += 1.0;
        for ((s, q), &v) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(x) {
            let v = v as f64;
            *s += v;
            *q += v * v;
        }
    }

    fn mean_var(&self) -> (Vec<f64>, Vec<f64>) {
        let mean: Vec<f64> = self.sum.iter().map(|s| s / self.count).collect();
        let var = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| q / self.count - m * m)
            .collect();
        (mean, var)
    }
}

fn check_corpus(utts: &[Utterance<'_>]) -> Result<usize> {
    let first = utts.first().ok_or(Error::EmptyCorpus)?;
    let dim = first.features.cols();
    for u in utts {
        if u.features.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: u.features.cols(),
            }
            .in_utterance(u.id));
        }
        if u.transcript.is_empty() {
            return Err(Error::EmptyInput("transcript").in_utterance(u.id));
        }
    }
    Ok(dim)
}

fn count_transitions(expansion: &[usize], path: &[usize], stay: &mut [f64], leave: &mut [f64]) {
    for t in 1..path.len() {
        if path[t] == path[t - 1] {
            stay[expansion[path[t]]] += 1.0;
        } else {
            leave[expansion[path[t - 1]]] += 1.0;
        }
    }
    if let Some(&last) = path.last() {
        leave[expansion[last]] += 1.0;
    }
}

/// Flat start: each utterance's frames are split uniformly over its state
/// expansion and every state gets a single Gaussian from its frames. States
/// that receive no frames fall back to the global mean and variance.
pub fn flat_start(phones: &PhoneSet, utts: &[Utterance<'_>]) -> Result<GmmAcousticModel> {
    let dim = check_corpus(utts)?;
    let n_states = phones.num_states();
    let mut stats = vec![Moments::new(dim); n_states];
    let mut global = Moments::new(dim);
    let mut stay = vec![0.0; n_states];
    let mut leave = vec![0.0; n_states];
    for u in utts {
        let expansion = expand_transcript(u.transcript);
        if let Some(&bad) = u.transcript.iter().find(|&&p| p >= phones.len()) {
            return Err(Error::InvalidParameter(format!("phone index {bad} out of range")).in_utterance(u.id));
        }
        let (t_len, s_len) = (u.features.rows(), expansion.len());
        if t_len < s_len {
            return Err(Error::TooShortForTranscript {
                frames: t_len,
                states: s_len,
            }
            .in_utterance(u.id));
        }
        let path: Vec<usize> = (0..t_len).map(|t| t * s_len / t_len).collect();
        for (t, &j) in path.iter().enumerate() {
            let x = u.features.row(t);
            stats[expansion[j]].add(x);
            global.add(x);
        }
        count_transitions(&expansion, &path, &mut stay, &mut leave);
    }
    let (g_mean, g_var) = global.mean_var();
    let states = stats
        .iter()
        .map(|m| {
            let (mean, var) = if m.count > 0.0 { m.mean_var() } else { (g_mean.clone(), g_var.clone()) };
            DiagGmm::single(mean, var)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut topology = HmmTopology::uniform(n_states, 0.5)?;
    topology.reestimate(&stay, &leave);
    GmmAcousticModel::new(phones.clone(), topology, states)
}

/// Aligns every utterance, tagging errors and alignments with the id.
pub fn align_corpus(model: &GmmAcousticModel, utts: &[Utterance<'_>]) -> Result<Vec<Alignment>> {
    utts.iter()
        .map(|u| {
            super::force_align(model, u.features, u.transcript)
                .map(|a| Alignment::new(u.id, a.states))
                .map_err(|e| e.in_utterance(u.id))
        })
        .collect()
}

/// One E step: hard state and component assignments for the whole corpus.
struct Assignment {
    score: f64,
    /// Per state, per component moments.
    moments: Vec<Vec<Moments>>,
    /// Per state, the `(utterance, frame)` pairs assigned to it.
    frames: Vec<Vec<(usize, usize)>>,
    stay: Vec<f64>,
    leave: Vec<f64>,
}

fn assign(model: &GmmAcousticModel, utts: &[Utterance<'_>]) -> Result<Assignment> {
    let n_states = model.num_states();
    let dim = model.dim();
    let mut out = Assignment {
        score: 0.0,
        moments: model
            .states()
            .iter()
            .map(|g| vec![Moments::new(dim); g.num_components()])
            .collect(),
        frames: vec![Vec::new(); n_states],
        stay: vec![0.0; n_states],
        leave: vec![0.0; n_states],
    };
    for (ui, u) in utts.iter().enumerate() {
        let expansion = expand_transcript(u.transcript);
        let (path, score) = viterbi(model, u.features, &expansion).map_err(|e| e.in_utterance(u.id))?;
        out.score += score;
        for (t, &j) in path.iter().enumerate() {
            let s = expansion[j];
            let x = u.features.row(t);
            let (c, _) = model.state(s).best_component(x);
            out.moments[s][c].add(x);
            out.frames[s].push((ui, t));
        }
        count_transitions(&expansion, &path, &mut out.stay, &mut out.leave);
    }
    Ok(out)
}

fn reestimate_state(old: &DiagGmm, moments: &[Moments]) -> Result<DiagGmm> {
    let used: Vec<&Moments> = moments.iter().filter(|m| m.count > 0.0).collect();
    if used.is_empty() {
        return Ok(old.clone());
    }
    let mut weights = Vec::with_capacity(used.len());
    let mut means = Vec::with_capacity(used.len() * old.dim());
    let mut vars = Vec::with_capacity(used.len() * old.dim());
    for m in used {
        let (mu, var) = m.mean_var();
        weights.push(m.count);
        means.extend(mu);
        vars.extend(var);
    }
    DiagGmm::new(old.dim(), weights, means, vars)
}

/// Splits the heaviest component of `gmm` in two (means at `mu +- 0.1 sigma`)
/// and refines the pair on the frames it owns. The split is kept only if it
/// does not lower the hard-assignment score of those frames, so Viterbi EM
/// stays monotone across mixup steps.
fn try_split(gmm: &DiagGmm, frames: &[&[f32]]) -> Result<Option<DiagGmm>> {
    const REFINE_STEPS: usize = 4;
    let dim = gmm.dim();
    let c = gmm.heaviest_component();
    let owned: Vec<&[f32]> = frames.iter().copied().filter(|x| gmm.best_component(x).0 == c).collect();
    if owned.len() < 2 {
        return Ok(None);
    }
    let before: f64 = owned.iter().map(|x| gmm.component_log_likelihood(c, x)).sum();
    let w = gmm.weights()[c];
    let mu = gmm.mean(c);
    let var = gmm.variance(c);
    let pair_means: Vec<f64> = mu
        .iter()
        .zip(var)
        .map(|(m, v)| m + 0.1 * v.sqrt())
        .chain(mu.iter().zip(var).map(|(m, v)| m - 0.1 * v.sqrt()))
        .collect();
    let mut pair = DiagGmm::new(dim, vec![0.5, 0.5], pair_means, [var, var].concat())?;
    for _ in 0..REFINE_STEPS {
        let mut acc = [Moments::new(dim), Moments::new(dim)];
        for x in &owned {
            acc[pair.best_component(x).0].add(x);
        }
        if acc.iter().any(|m| m.count == 0.0) {
            return Ok(None);
        }
        let (m0, v0) = acc[0].mean_var();
        let (m1, v1) = acc[1].mean_var();
        pair = DiagGmm::new(dim, vec![acc[0].count, acc[1].count], [m0, m1].concat(), [v0, v1].concat())?;
    }
    // Pair weights are relative to the split component's share.
    let log_w = w.ln();
    let after: f64 = owned.iter().map(|x| pair.max_log_likelihood(x) + log_w).sum();
    if after < before {
        return Ok(None);
    }
    let mut weights = Vec::with_capacity(gmm.num_components() + 1);
    let mut means = Vec::with_capacity((gmm.num_components() + 1) * dim);
    let mut vars = Vec::with_capacity((gmm.num_components() + 1) * dim);
    for k in 0..gmm.num_components() {
        if k == c {
            for p in 0..2 {
                weights.push(w * pair.weights()[p]);
                means.extend_from_slice(pair.mean(p));
                vars.extend_from_slice(pair.variance(p));
            }
        } else {
            weights.push(gmm.weights()[k]);
            means.extend_from_slice(gmm.mean(k));
            vars.extend_from_slice(gmm.variance(k));
        }
    }
    DiagGmm::new(dim, weights, means, vars).map(Some)
}

/// Viterbi (hard-assignment) EM with optional mixture growth. Each iteration
/// aligns the corpus, then re-estimates weights, means, variances and
/// transition probabilities from the hard assignments.
pub fn em_train(model: &GmmAcousticModel, utts: &[Utterance<'_>], config: &EmConfig) -> Result<EmOutcome> {
    let mut model = model.clone();
    let mut history = Vec::new();
    if config.iterations == 0 {
        return Ok(EmOutcome {
            model,
            log_likelihood: history,
        });
    }
    let dim = check_corpus(utts)?;
    if dim != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: dim,
        });
    }
    for iteration in 1..=config.iterations {
        let a = assign(&model, utts)?;
        history.push(a.score);
        let target = config.mixup_target(iteration);
        let (topology, states) = model.parts_mut();
        topology.reestimate(&a.stay, &a.leave);
        for (s, gmm) in states.iter_mut().enumerate() {
            if a.frames[s].is_empty() {
                continue;
            }
            *gmm = reestimate_state(gmm, &a.moments[s])?;
            if let Some(target) = target {
                let frames: Vec<&[f32]> = a.frames[s].iter().map(|&(u, t)| utts[u].features.row(t)).collect();
                while gmm.num_components() < target {
                    match try_split(gmm, &frames)? {
                        Some(g) => *gmm = g,
                        None => break,
                    }
                }
            }
        }
    }
    history.push(assign(&model, utts)?.score);
    Ok(EmOutcome {
        model,
        log_likelihood: history,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureMatrix;
    use crate::hmm::{sample_utterance, state_id};
    use crate::rng;

    fn phones() -> PhoneSet {
        PhoneSet::new(&["sil", "a", "b"], "sil").unwrap()
    }

    #[test]
    fn flat_start_single_phone_thirds() {
        let vals: Vec<f32> = (0..9).map(|t| t as f32).collect();
        let f = FeatureMatrix::new(9, 1, vals).unwrap();
        let tr = [1usize];
        let m = flat_start(&phones(), &[Utterance { id: "u", features: &f, transcript: &tr }]).unwrap();
        assert_eq!(m.state(state_id(1, 0)).mean(0), &[1.0]);
        assert_eq!(m.state(state_id(1, 1)).mean(0), &[4.0]);
        assert_eq!(m.state(state_id(1, 2)).mean(0), &[7.0]);
        // Unvisited states take the global statistics.
        assert_eq!(m.state(state_id(2, 1)).mean(0), &[4.0]);
    }

    #[test]
    fn flat_start_errors() {
        assert_eq!(flat_start(&phones(), &[]), Err(Error::EmptyCorpus));
        let f = FeatureMatrix::new(1, 1, vec![0.0]).unwrap();
        let tr = [1usize];
        let err = flat_start(&phones(), &[Utterance { id: "u1", features: &f, transcript: &tr }]).unwrap_err();
        assert!(err.to_string().contains("utterance too short for transcript"), "{err}");
        assert!(err.to_string().contains("u1"));
    }

    fn toy_corpus(seed: u64, n: usize) -> (GmmAcousticModel, Vec<(FeatureMatrix, Vec<usize>)>) {
        let dim = 2;
        let mut r = rng::seeded(seed);
        let means = [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [-3.0, 0.0], [0.0, -3.0], [3.0, 3.0], [-3.0, -3.0], [3.0, -3.0], [-3.0, 3.0]];
        let states = means
            .iter()
            .map(|m| DiagGmm::single(m.to_vec(), vec![1.0; dim]).unwrap())
            .collect();
        let truth = GmmAcousticModel::new(phones(), HmmTopology::uniform(9, 0.7).unwrap(), states).unwrap();
        let data = (0..n)
            .map(|i| {
                let tr = if i % 2 == 0 { vec![1, 2, 1] } else { vec![2, 1, 2, 2] };
                (sample_utterance(&truth, &tr, &mut r).unwrap().0, tr)
            })
            .collect();
        (truth, data)
    }

    #[test]
    fn em_is_monotone_with_mixup() {
        let (_, data) = toy_corpus(7, 30);
        let utts: Vec<Utterance> = data
            .iter()
            .enumerate()
            .map(|(i, (f, tr))| Utterance { id: if i == 0 { "first" } else { "other" }, features: f, transcript: tr })
            .collect();
        let init = flat_start(&phones(), &utts).unwrap();
        let out = em_train(&init, &utts, &EmConfig::default()).unwrap();
        assert_eq!(out.log_likelihood.len(), 11);
        for w in out.log_likelihood.windows(2) {
            assert!(w[1] >= w[0] - 1e-6 * w[0].abs(), "{:?}", out.log_likelihood);
        }
        for g in out.model.states() {
            assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(out.model.max_components() >= 2);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let (_, data) = toy_corpus(8, 4);
        let utts: Vec<Utterance> = data.iter().map(|(f, tr)| Utterance { id: "u", features: f, transcript: tr }).collect();
        let init = flat_start(&phones(), &utts).unwrap();
        let out = em_train(&init, &utts, &EmConfig::without_mixup(0)).unwrap();
        assert_eq!(out.model, init);
        assert!(out.log_likelihood.is_empty());
    }

    #[test]
    fn deterministic_flat_start() {
        let (_, data) = toy_corpus(9, 6);
        let utts: Vec<Utterance> = data.iter().map(|(f, tr)| Utterance { id: "u", features: f, transcript: tr }).collect();
        assert_eq!(flat_start(&phones(), &utts).unwrap(), flat_start(&phones(), &utts).unwrap());
    }

    #[test]
    fn alignment_failure_names_utterance() {
        let (_, data) = toy_corpus(10, 2);
        let mut utts: Vec<Utterance> = data.iter().map(|(f, tr)| Utterance { id: "ok", features: f, transcript: tr }).collect();
        let init = flat_start(&phones(), &utts).unwrap();
        let short = FeatureMatrix::new(4, 2, vec![0.0; 8]).unwrap();
        let tr = [1usize, 2];
        utts.push(Utterance { id: "short-one", features: &short, transcript: &tr });
        let err = em_train(&init, &utts, &EmConfig::without_mixup(1)).unwrap_err();
        assert!(matches!(err, Error::Utterance { ref id, .. } if id == "short-one"));
    }
}
