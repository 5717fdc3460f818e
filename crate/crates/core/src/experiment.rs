//! End-to-end experiment drivers over the synthetic corpus: context-window
//! sweeps, supervision-source comparison and initialization comparison.

use core::fmt;
use core::str::FromStr;

use crate::contaminate::{ContaminationSpec, Contaminator};
use crate::decode::{phone_loop_decode, posteriors_to_loglik, PhoneLoopGraph};
use crate::features::{apply_normalizer, fit_normalizer, splice, ContextWindowSpec, FeatureMatrix, Frontend};
use crate::hmm::{align_corpus, em_train, flat_start, transfer_alignment, EmConfig, PhoneSet, Utterance};
use crate::ir::{synth_ir_with, SynthIrSpec, DEFAULT_DRR_DB};
use crate::linalg::argmax;
use crate::nnet::{
    ct_pretrain_transfer, rbm_pretrain, train, FrameSet, Layout, MlpModel, RbmConfig, TrainHistory, TrainSchedule,
    CT_FINE_TUNE_LR,
};
use crate::prelude::*;
use crate::score::ScoreReport;
use crate::synth::{pink_noise, synth_corpus, SyntheticCorpusSpec, SyntheticUtterance};
use crate::{rng, Error, Result, Waveform};

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::InvalidParameter(format!(
                        concat!("unknown ", stringify!($name), " {:?}"),
                        other
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Condition { Clean => "clean", Rev => "rev", RevNoise => "rev_noise" });
keyword_enum!(Supervision { Standard => "standard", CtLab => "ct_lab" });
keyword_enum!(Pretraining { None => "none", Rbm => "rbm", Ct => "ct" });
keyword_enum!(ExperimentKind {
    Single => "single",
    WindowSweep => "window_sweep",
    Supervision => "supervision",
    Pretraining => "pretraining",
});

/// Everything that defines an experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub condition: Condition,
    pub windows: Vec<ContextWindowSpec>,
    pub supervision: Supervision,
    pub pretraining: Pretraining,
    pub schedule: TrainSchedule,
    pub seeds: Vec<u64>,
    pub t60: f64,
    pub drr_db: f64,
    pub snr_db: f64,
    pub num_phones: usize,
    pub train_utterances: usize,
    pub dev_utterances: usize,
    pub test_utterances: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub em_iterations: usize,
    pub max_mixtures: usize,
    pub rbm: RbmConfig,
    pub acoustic_scale: f64,
    pub insertion_penalty: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Single,
            condition: Condition::Rev,
            windows: vec![ContextWindowSpec::new(8, 8)],
            supervision: Supervision::CtLab,
            pretraining: Pretraining::Rbm,
            schedule: TrainSchedule::default(),
            seeds: vec![1, 2, 3, 4, 5],
            t60: 0.7,
            drr_db: DEFAULT_DRR_DB,
            snr_db: 10.0,
            num_phones: 10,
            train_utterances: 400,
            dev_utterances: 50,
            test_utterances: 100,
            hidden_layers: 4,
            hidden_width: 300,
            em_iterations: 10,
            max_mixtures: 4,
            rbm: RbmConfig::default(),
            acoustic_scale: 1.0,
            insertion_penalty: 0.0,
        }
    }
}

/// The windows compared by a full sweep.
pub fn standard_windows() -> Vec<ContextWindowSpec> {
    [(16, 0), (10, 6), (8, 8), (6, 10), (0, 16)]
        .iter()
        .map(|&(p, f)| ContextWindowSpec::new(p, f))
        .collect()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.windows.is_empty() {
            return bad("at least one context window is required");
        }
        if self.train_utterances == 0 || self.dev_utterances == 0 || self.test_utterances == 0 {
            return bad("every split needs at least one utterance");
        }
        if self.hidden_width == 0 && self.hidden_layers > 0 {
            return bad("hidden width must be positive");
        }
        if self.max_mixtures == 0 {
            return bad("at least one mixture component per state is required");
        }
        if !(self.t60 > 0.0) {
            return bad("t60 must be positive");
        }
        self.schedule.validate()
    }

    fn em_config(&self) -> EmConfig {
        EmConfig::growing(self.em_iterations, self.max_mixtures)
    }

    fn corpus_spec(&self, seed: u64) -> SyntheticCorpusSpec {
        SyntheticCorpusSpec {
            num_phones: self.num_phones,
            seed: rng::derive_seed(seed, "corpus"),
            ..SyntheticCorpusSpec::default()
        }
    }

    fn layout(&self, window: ContextWindowSpec) -> Result<Layout> {
        Layout::mlp(
            crate::features::FEATURE_DIM * window.len(),
            self.hidden_layers,
            self.hidden_width,
            3 * self.num_phones,
        )
    }
}

/// One trained and evaluated model.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub condition: Condition,
    pub window: ContextWindowSpec,
    pub supervision: Supervision,
    pub pretraining: Pretraining,
    pub seed: u64,
    pub per: f64,
    pub frame_accuracy: f64,
    pub epochs: usize,
}

/// Rows of an experiment in the order they were produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ResultRow>,
}

pub const REPORT_COLUMNS: [&str; 8] = [
    "condition",
    "window",
    "supervision",
    "pretraining",
    "seed",
    "PER%",
    "frame_acc%",
    "epochs",
];

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

impl Report {
    /// Detail rows followed by one `mean ± std` row per arm, as cell strings.
    pub fn table(&self) -> Vec<[String; 8]> {
        let mut out: Vec<[String; 8]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.condition.to_string(),
                    r.window.label(),
                    r.supervision.to_string(),
                    r.pretraining.to_string(),
                    r.seed.to_string(),
                    format!("{:.1}", r.per),
                    format!("{:.2}", r.frame_accuracy),
                    r.epochs.to_string(),
                ]
            })
            .collect();
        let mut arms: Vec<(Condition, ContextWindowSpec, Supervision, Pretraining)> = Vec::new();
        for r in &self.rows {
            let key = (r.condition, r.window, r.supervision, r.pretraining);
            if !arms.contains(&key) {
                arms.push(key);
            }
        }
        for key in arms {
            let rows: Vec<&ResultRow> = self
                .rows
                .iter()
                .filter(|r| (r.condition, r.window, r.supervision, r.pretraining) == key)
                .collect();
            let per = mean_std(&rows.iter().map(|r| r.per).collect::<Vec<_>>());
            let acc = mean_std(&rows.iter().map(|r| r.frame_accuracy).collect::<Vec<_>>());
            let ep = mean_std(&rows.iter().map(|r| r.epochs as f64).collect::<Vec<_>>());
            out.push([
                key.0.to_string(),
                key.1.label(),
                key.2.to_string(),
                key.3.to_string(),
                "mean".into(),
                format!("{:.1} ± {:.1}", per.0, per.1),
                format!("{:.2} ± {:.2}", acc.0, acc.1),
                format!("{:.1} ± {:.1}", ep.0, ep.1),
            ]);
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut s = REPORT_COLUMNS.join("\t");
        s.push('\n');
        for row in self.table() {
            s.push_str(&row.join("\t"));
            s.push('\n');
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("| {} |\n", REPORT_COLUMNS.join(" | "));
        s.push_str(&format!("|{}\n", "---|".repeat(REPORT_COLUMNS.len())));
        for row in self.table() {
            s.push_str(&format!("| {} |\n", row.join(" | ")));
        }
        s
    }

    /// Rows of one arm, in seed order of appearance.
    pub fn arm(&self, window: ContextWindowSpec, supervision: Supervision, pretraining: Pretraining) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| r.window == window && r.supervision == supervision && r.pretraining == pretraining)
            .collect()
    }
}

/// One split of the corpus: clean audio with its annotation, plus base
/// features of the clean and the contaminated audio.
struct Split {
    utts: Vec<SyntheticUtterance>,
    clean: Vec<FeatureMatrix>,
    distant: Vec<FeatureMatrix>,
}

impl Split {
    fn transcripts(&self) -> Vec<&[usize]> {
        self.utts.iter().map(|u| u.phones.as_slice()).collect()
    }
}

/// Corpus material of one seed, shared by every arm.
struct SeedData {
    phones: PhoneSet,
    train: Split,
    dev: Split,
    test: Split,
}

type Progress<'a> = &'a mut dyn FnMut(&str);

fn contaminator(config: &ExperimentConfig, seed: u64, split: &str) -> Result<Option<Contaminator>> {
    if config.condition == Condition::Clean {
        return Ok(None);
    }
    let sr = crate::SAMPLE_RATE;
    let ir = synth_ir_with(&SynthIrSpec {
        t60: config.t60,
        length: (config.t60 * sr as f64).ceil() as usize,
        sample_rate: sr,
        direct_delay: 0,
        drr_db: config.drr_db,
        seed: rng::derive_seed(seed, &format!("ir-{split}")),
    })?;
    let mut spec = ContaminationSpec::reverb_only(ir);
    if config.condition == Condition::RevNoise {
        spec.noise = Some(pink_noise(30 * sr as usize, sr, rng::derive_seed(seed, &format!("noise-{split}")))?);
        spec.target_snr_db = config.snr_db;
        spec.noise_offset_seed = rng::derive_seed(seed, &format!("noise-offset-{split}"));
    }
    Ok(Some(Contaminator::new(spec)))
}

fn prepare_split(config: &ExperimentConfig, seed: u64, name: &str, count: usize, fe: &Frontend) -> Result<Split> {
    let utts = synth_corpus(&config.corpus_spec(seed).split(name, count))?;
    let room = contaminator(config, seed, name)?;
    let mut clean = Vec::with_capacity(utts.len());
    let mut distant = Vec::with_capacity(utts.len());
    for u in &utts {
        let c = fe.base_features(&u.audio).map_err(|e| e.in_utterance(&u.id))?;
        let d = match &room {
            Some(room) => {
                let (audio, _): (Waveform, _) = room.contaminate(&u.id, &u.audio)?;
                fe.base_features(&audio).map_err(|e| e.in_utterance(&u.id))?
            }
            None => c.clone(),
        };
        clean.push(c);
        distant.push(d);
    }
    Ok(Split { utts, clean, distant })
}

fn prepare(config: &ExperimentConfig, seed: u64, progress: Progress<'_>) -> Result<SeedData> {
    progress(&format!("seed {seed}: synthesizing and contaminating corpus ({})", config.condition));
    let fe = Frontend::default();
    Ok(SeedData {
        phones: config.corpus_spec(seed).phone_set(),
        train: prepare_split(config, seed, "train", config.train_utterances, &fe)?,
        dev: prepare_split(config, seed, "dev", config.dev_utterances, &fe)?,
        test: prepare_split(config, seed, "test", config.test_utterances, &fe)?,
    })
}

fn utterance_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("utt{i}")).collect()
}

fn utterances<'a>(fs: &'a [FeatureMatrix], transcripts: &[&'a [usize]], ids: &'a [String]) -> Vec<Utterance<'a>> {
    fs.iter()
        .zip(transcripts)
        .zip(ids)
        .map(|((f, t), id)| Utterance {
            id,
            features: f,
            transcript: t,
        })
        .collect()
}

/// Frame labels for the train and dev splits from a GMM aligner trained on
/// the train split of the given features.
fn gmm_labels(
    config: &ExperimentConfig,
    phones: &PhoneSet,
    train: (&[FeatureMatrix], &[&[usize]]),
    dev: (&[FeatureMatrix], &[&[usize]]),
) -> Result<(Vec<Vec<u32>>, Vec<Vec<u32>>)> {
    let stats = fit_normalizer(train.0.iter())?;
    let norm = |fs: &[FeatureMatrix]| fs.iter().map(|f| apply_normalizer(f, &stats)).collect::<Result<Vec<_>>>();
    let tr = norm(train.0)?;
    let dv = norm(dev.0)?;
    let tr_ids = utterance_ids(tr.len());
    let dv_ids = utterance_ids(dv.len());
    let tr_utts = utterances(&tr, train.1, &tr_ids);
    let dv_utts = utterances(&dv, dev.1, &dv_ids);
    let init = flat_start(phones, &tr_utts)?;
    let model = em_train(&init, &tr_utts, &config.em_config())?.model;
    let labels = |u: &[Utterance<'_>]| -> Result<Vec<Vec<u32>>> {
        Ok(align_corpus(&model, u)?.into_iter().map(|a| a.states).collect())
    };
    Ok((labels(&tr_utts)?, labels(&dv_utts)?))
}

/// Train/dev labels for the distant features under a supervision source.
fn supervision_labels(
    config: &ExperimentConfig,
    data: &SeedData,
    supervision: Supervision,
) -> Result<(Vec<Vec<u32>>, Vec<Vec<u32>>)> {
    let (tr_t, dv_t) = (data.train.transcripts(), data.dev.transcripts());
    match supervision {
        Supervision::Standard => gmm_labels(
            config,
            &data.phones,
            (&data.train.distant, &tr_t),
            (&data.dev.distant, &dv_t),
        ),
        Supervision::CtLab => {
            let (tr, dv) = gmm_labels(config, &data.phones, (&data.train.clean, &tr_t), (&data.dev.clean, &dv_t))?;
            let carry = |labels: Vec<Vec<u32>>, distant: &[FeatureMatrix]| -> Result<Vec<Vec<u32>>> {
                labels
                    .into_iter()
                    .zip(distant)
                    .map(|(l, d)| {
                        let a = crate::hmm::Alignment::new("", l);
                        Ok(transfer_alignment(&a, d.rows())?.alignment.states)
                    })
                    .collect()
            };
            Ok((carry(tr, &data.train.distant)?, carry(dv, &data.dev.distant)?))
        }
    }
}

/// Spliced, normalized frame sets for train/dev/test of one feature view.
struct NetData {
    train: FrameSet,
    dev: FrameSet,
    test: Vec<FeatureMatrix>,
}

fn net_data(
    window: ContextWindowSpec,
    classes: usize,
    feats: (&[FeatureMatrix], &[FeatureMatrix], &[FeatureMatrix]),
    labels: (&[Vec<u32>], &[Vec<u32>]),
) -> Result<NetData> {
    let spliced = |fs: &[FeatureMatrix]| fs.iter().map(|f| splice(f, window)).collect::<Vec<_>>();
    let tr = spliced(feats.0);
    let stats = fit_normalizer(tr.iter())?;
    let dim = tr[0].cols();
    let mut train_set = FrameSet::new(dim, classes);
    for (f, l) in tr.iter().zip(labels.0) {
        train_set.push(&apply_normalizer(f, &stats)?, l)?;
    }
    drop(tr);
    let mut dev_set = FrameSet::new(dim, classes);
    for (f, l) in feats.1.iter().zip(labels.1) {
        dev_set.push(&apply_normalizer(&splice(f, window), &stats)?, l)?;
    }
    let test = feats
        .2
        .iter()
        .map(|f| apply_normalizer(&splice(f, window), &stats))
        .collect::<Result<Vec<_>>>()?;
    Ok(NetData {
        train: train_set,
        dev: dev_set,
        test,
    })
}

/// Test frame accuracy against construction labels and phone error rate of
/// phone-loop decoding.
fn evaluate(config: &ExperimentConfig, model: &MlpModel<f32>, test: &[FeatureMatrix], split: &Split) -> Result<(f64, f64)> {
    let priors: Vec<f64> = model.log_priors().iter().map(|l| l.exp()).collect();
    let graph = PhoneLoopGraph::new(config.num_phones)?.with_insertion_penalty(config.insertion_penalty);
    let (mut hits, mut frames) = (0usize, 0usize);
    let mut score = ScoreReport::default();
    for ((f, u), _) in test.iter().zip(&split.utts).zip(0..) {
        let post = model.forward(f)?;
        for (r, &l) in u.labels.iter().enumerate() {
            if argmax(post.row(r)) == l as usize {
                hits += 1;
            }
        }
        frames += u.labels.len();
        let ll = posteriors_to_loglik(&post, &priors, config.acoustic_scale)?;
        let hyp = phone_loop_decode(&ll, &graph)?;
        score.add(&u.id, &u.phones, &hyp)?;
    }
    Ok((score.per(), 100.0 * hits as f64 / frames as f64))
}

fn fit(
    config: &ExperimentConfig,
    init: &MlpModel<f32>,
    data: &NetData,
    seed: u64,
    lr: f64,
) -> Result<(MlpModel<f32>, TrainHistory)> {
    let schedule = TrainSchedule {
        seed: rng::derive_seed(seed, "sgd"),
        ..config.schedule
    };
    if lr == config.schedule.initial_lr {
        train(init, &data.train, &data.dev, &schedule)
    } else {
        ct_pretrain_transfer(init, &data.train, &data.dev, lr, &schedule)
    }
}

/// Trains one arm on prepared data and evaluates it on the test split.
#[allow(clippy::too_many_arguments)]
fn run_arm(
    config: &ExperimentConfig,
    data: &SeedData,
    seed: u64,
    window: ContextWindowSpec,
    supervision: Supervision,
    pretraining: Pretraining,
    labels: &(Vec<Vec<u32>>, Vec<Vec<u32>>),
    progress: Progress<'_>,
) -> Result<ResultRow> {
    let classes = 3 * config.num_phones;
    let layout = config.layout(window)?;
    let distant = net_data(
        window,
        classes,
        (&data.train.distant, &data.dev.distant, &data.test.distant),
        (&labels.0, &labels.1),
    )?;
    let init_seed = rng::derive_seed(seed, &format!("init-{}", window.label()));
    progress(&format!(
        "seed {seed}: training {} / {supervision} / {pretraining} ({} frames)",
        window.label(),
        distant.train.len()
    ));
    let rbm = RbmConfig {
        seed: rng::derive_seed(seed, "rbm"),
        ..config.rbm
    };
    let (model, history) = match pretraining {
        Pretraining::None => fit(config, &MlpModel::init_random(&layout, init_seed), &distant, seed, config.schedule.initial_lr)?,
        Pretraining::Rbm => {
            let (init, _) = rbm_pretrain(&distant.train, &layout, &rbm)?;
            fit(config, &init, &distant, seed, config.schedule.initial_lr)?
        }
        Pretraining::Ct => {
            // Close-talk network: same layout, clean features, labels from
            // the clean alignment, itself trained from an RBM stack fitted
            // on the clean features.
            let (tr_t, dv_t) = (data.train.transcripts(), data.dev.transcripts());
            let clean_labels =
                gmm_labels(config, &data.phones, (&data.train.clean, &tr_t), (&data.dev.clean, &dv_t))?;
            let clean = net_data(
                window,
                classes,
                (&data.train.clean, &data.dev.clean, &data.test.clean),
                (&clean_labels.0, &clean_labels.1),
            )?;
            let (ct_init, _) = rbm_pretrain(&clean.train, &layout, &rbm)?;
            let (ct_model, _) = fit(config, &ct_init, &clean, seed, config.schedule.initial_lr)?;
            drop(clean);
            fit(config, &ct_model, &distant, seed, CT_FINE_TUNE_LR)?
        }
    };
    let (per, frame_accuracy) = evaluate(config, &model, &distant.test, &data.test)?;
    Ok(ResultRow {
        condition: config.condition,
        window,
        supervision,
        pretraining,
        seed,
        per,
        frame_accuracy,
        epochs: history.epochs_to_converge,
    })
}

/// Context-window comparison: one model per (window, seed) with the
/// configured supervision and initialization.
pub fn run_window_sweep(config: &ExperimentConfig, progress: Progress<'_>) -> Result<Report> {
    config.validate()?;
    let mut report = Report::default();
    for &seed in &config.seeds {
        let data = prepare(config, seed, progress)?;
        let labels = supervision_labels(config, &data, config.supervision)?;
        for &w in &config.windows {
            report
                .rows
                .push(run_arm(config, &data, seed, w, config.supervision, config.pretraining, &labels, progress)?);
        }
    }
    Ok(report)
}

/// Standard (aligned on contaminated audio) versus close-talk-label
/// supervision, everything else fixed.
pub fn run_supervision_experiment(config: &ExperimentConfig, progress: Progress<'_>) -> Result<Report> {
    config.validate()?;
    let window = config.windows[0];
    let mut report = Report::default();
    for &seed in &config.seeds {
        let data = prepare(config, seed, progress)?;
        for sup in [Supervision::Standard, Supervision::CtLab] {
            let labels = supervision_labels(config, &data, sup)?;
            report
                .rows
                .push(run_arm(config, &data, seed, window, sup, config.pretraining, &labels, progress)?);
        }
    }
    Ok(report)
}

/// RBM versus close-talk initialization with close-talk labels in both arms.
pub fn run_pretraining_experiment(config: &ExperimentConfig, progress: Progress<'_>) -> Result<Report> {
    config.validate()?;
    let window = config.windows[0];
    let mut report = Report::default();
    for &seed in &config.seeds {
        let data = prepare(config, seed, progress)?;
        let labels = supervision_labels(config, &data, Supervision::CtLab)?;
        for pt in [Pretraining::Rbm, Pretraining::Ct] {
            report
                .rows
                .push(run_arm(config, &data, seed, window, Supervision::CtLab, pt, &labels, progress)?);
        }
    }
    Ok(report)
}

/// Dispatches on `config.kind`; `single` trains the first window with the
/// configured supervision and initialization.
pub fn run_experiment(config: &ExperimentConfig, progress: Progress<'_>) -> Result<Report> {
    match config.kind {
        ExperimentKind::Single => {
            let single = ExperimentConfig {
                windows: vec![config.windows[0]],
                ..config.clone()
            };
            run_window_sweep(&single, progress)
        }
        ExperimentKind::WindowSweep => run_window_sweep(config, progress),
        ExperimentKind::Supervision => run_supervision_experiment(config, progress),
        ExperimentKind::Pretraining => run_pretraining_experiment(config, progress),
    }
}
