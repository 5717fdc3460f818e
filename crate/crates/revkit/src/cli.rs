//! The `revkit` command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use revkit_core::contaminate::ContaminationSpec;
use revkit_core::decode::{phone_loop_decode, posteriors_to_loglik, PhoneLoopGraph};
use revkit_core::experiment::run_experiment;
use revkit_core::features::{ContextWindowSpec, Frontend};
use revkit_core::hmm::{
    align_corpus, em_train, flat_start, transfer_alignment, Alignment, EmConfig, PhoneSet, Utterance,
};
use revkit_core::ir::{estimate_ir, estimate_t60, generate_ess, inverse_filter, synth_ir_with, SweepSpec, SynthIrSpec};
use revkit_core::nnet::{
    ct_pretrain_transfer, rbm_pretrain, train, FrameSet, Layout, MlpModel, RbmConfig, TrainHistory, TrainSchedule,
    CT_FINE_TUNE_LR, DEFAULT_LR,
};
use revkit_core::score::ScoreReport;
use revkit_core::synth::SyntheticCorpusSpec;
use revkit_core::{rng, SAMPLE_RATE};

use crate::archive;
use crate::config::load_config;
use crate::corpus::{contaminate_corpus, write_synth_corpus, PHONES_FILE};
use crate::feats::{compute_features, FeatureSet};
use crate::ir_io::{read_ir, write_ir};
use crate::manifest::{load_manifest, read_phone_set, Manifest};
use crate::model_io::{read_gmm, write_gmm, ModelFile};
use crate::report::{score_report_tsv, write_report};
use crate::wav::{read_wav, write_wav, Encoding};

#[derive(Debug, Parser)]
#[command(name = "revkit", version, about = "Distant-talking acoustic model toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an exponential sine sweep (and optionally its inverse filter).
    EssGenerate(EssGenerateArgs),
    /// Deconvolve a recorded sweep into an impulse response.
    IrEstimate(IrEstimateArgs),
    /// Synthesize an exponentially decaying room response.
    IrSynth(IrSynthArgs),
    /// Estimate the reverberation time of an impulse response.
    T60(T60Args),
    /// Reverberate (and optionally add noise to) every utterance of a manifest.
    Contaminate(ContaminateArgs),
    /// Extract normalized, spliced features for a manifest.
    Feats(FeatsArgs),
    /// Train the GMM-HMM aligner with Viterbi EM.
    AlignTrain(AlignTrainArgs),
    /// Force-align a manifest with a trained aligner.
    Align(AlignArgs),
    /// Train the acoustic network.
    Train(TrainArgs),
    /// Initialize a network by stacking RBMs.
    PretrainRbm(PretrainRbmArgs),
    /// Fine-tune a close-talk network on distant data.
    PretrainCt(PretrainCtArgs),
    /// Frame accuracy of a network against reference labels.
    FrameAcc(FrameAccArgs),
    /// Phone-loop decoding with a trained network.
    Decode(DecodeArgs),
    /// Phone error rate of hypotheses against a manifest.
    Score(ScoreArgs),
    /// Generate a synthetic phone corpus with oracle labels.
    SynthCorpus(SynthCorpusArgs),
    /// Run a configured experiment and write report.tsv and report.md.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 20.0)]
    pub f_start: f64,
    #[arg(long, default_value_t = 7900.0)]
    pub f_end: f64,
    /// Sweep length in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.5)]
    pub amplitude: f64,
}

impl SweepArgs {
    fn spec(&self) -> anyhow::Result<SweepSpec> {
        Ok(SweepSpec::new(self.f_start, self.f_end, self.duration, self.amplitude, SAMPLE_RATE)?)
    }
}

#[derive(Debug, Args)]
pub struct EssGenerateArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the inverse filter here.
    #[arg(long)]
    pub inverse: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IrEstimateArgs {
    /// Recording of the sweep played in the room.
    #[arg(long)]
    pub recording: PathBuf,
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Response length in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IrSynthArgs {
    #[arg(long, default_value_t = 0.7)]
    pub t60: f64,
    /// Response length in seconds; defaults to the T60.
    #[arg(long)]
    pub length: Option<f64>,
    /// Direct-to-reverberant ratio in dB.
    #[arg(long, default_value_t = revkit_core::ir::DEFAULT_DRR_DB, allow_hyphen_values = true)]
    pub drr: f64,
    /// Samples before the direct path.
    #[arg(long, default_value_t = 0)]
    pub delay: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct T60Args {
    #[arg(long)]
    pub ir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ManifestArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Phone inventory; defaults to phones.txt next to the manifest.
    #[arg(long)]
    pub phones: Option<PathBuf>,
}

impl ManifestArgs {
    fn load(&self) -> anyhow::Result<Manifest> {
        load(&self.manifest, self.phones.as_deref())
    }
}

#[derive(Debug, Args)]
pub struct ContaminateArgs {
    #[command(flatten)]
    pub input: ManifestArgs,
    #[arg(long)]
    pub ir: PathBuf,
    #[arg(long)]
    pub noise: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub snr: f64,
    #[arg(long, default_value_t = 0.0)]
    pub snr_jitter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeatsArgs {
    #[command(flatten)]
    pub input: ManifestArgs,
    #[arg(long, default_value_t = 8)]
    pub past: usize,
    #[arg(long, default_value_t = 8)]
    pub future: usize,
    /// Normalization stats to apply; fitted on this manifest when absent.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignTrainArgs {
    #[command(flatten)]
    pub input: ManifestArgs,
    /// Feature directory; unspliced features are computed when absent.
    #[arg(long)]
    pub feats: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    #[arg(long, default_value_t = 4)]
    pub max_mixtures: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: ManifestArgs,
    /// Feature directory; unspliced features are computed when absent.
    #[arg(long)]
    pub feats: Option<PathBuf>,
    /// Output directory; receives ali.rvk and ali.index.
    #[arg(long)]
    pub out: PathBuf,
}

/// A manifest, its features and a label source.
#[derive(Debug, Args)]
pub struct LabeledData {
    #[command(flatten)]
    pub input: ManifestArgs,
    #[arg(long)]
    pub feats: PathBuf,
    /// Alignment archive (ali.rvk), or `oracle` for the manifest's labels.
    #[arg(long)]
    pub labels: String,
}

#[derive(Debug, Args)]
pub struct DevData {
    #[arg(long)]
    pub dev_manifest: PathBuf,
    #[arg(long)]
    pub dev_feats: PathBuf,
    #[arg(long)]
    pub dev_labels: String,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long, default_value_t = 20)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: LabeledData,
    #[command(flatten)]
    pub dev: DevData,
    #[arg(long, default_value_t = 4)]
    pub hidden_layers: usize,
    #[arg(long, default_value_t = 300)]
    pub hidden_width: usize,
    /// Start from this model instead of a random initialization.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LR)]
    pub lr: f64,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PretrainRbmArgs {
    #[command(flatten)]
    pub input: ManifestArgs,
    #[arg(long)]
    pub feats: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub hidden_layers: usize,
    #[arg(long, default_value_t = 300)]
    pub hidden_width: usize,
    #[arg(long, default_value_t = 3)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr_gb: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lr_bb: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PretrainCtArgs {
    /// Network trained on close-talk data.
    #[arg(long)]
    pub ct_model: PathBuf,
    #[command(flatten)]
    pub data: LabeledData,
    #[command(flatten)]
    pub dev: DevData,
    #[arg(long, default_value_t = CT_FINE_TUNE_LR)]
    pub lr: f64,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FrameAccArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: LabeledData,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: ManifestArgs,
    #[arg(long)]
    pub feats: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub ins_penalty: f64,
    #[arg(long, default_value_t = 0.5)]
    pub self_loop: f64,
    /// Hypotheses as `id<TAB>phones`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Reference manifest.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub phones: Option<PathBuf>,
    #[arg(long)]
    pub hyp: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthCorpusArgs {
    #[arg(long, default_value_t = 400)]
    pub utterances: usize,
    /// Inventory size including silence.
    #[arg(long, default_value_t = 10)]
    pub num_phones: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Split name; utterance ids are `<split>-00000`, ...
    #[arg(long, default_value = "train")]
    pub split: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Suppress progress messages.
    #[arg(long)]
    pub quiet: bool,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::EssGenerate(a) => ess_generate(a),
        Command::IrEstimate(a) => ir_estimate(a),
        Command::IrSynth(a) => ir_synth(a),
        Command::T60(a) => t60(a),
        Command::Contaminate(a) => contaminate(a),
        Command::Feats(a) => feats(a),
        Command::AlignTrain(a) => align_train(a),
        Command::Align(a) => align(a),
        Command::Train(a) => train_cmd(a),
        Command::PretrainRbm(a) => pretrain_rbm(a),
        Command::PretrainCt(a) => pretrain_ct(a),
        Command::FrameAcc(a) => frame_acc(a),
        Command::Decode(a) => decode(a),
        Command::Score(a) => score(a),
        Command::SynthCorpus(a) => synth_corpus(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn load(manifest: &Path, phones: Option<&Path>) -> anyhow::Result<Manifest> {
    let phones_path = match phones {
        Some(p) => p.to_path_buf(),
        None => manifest.parent().unwrap_or(Path::new("")).join(PHONES_FILE),
    };
    let phones = read_phone_set(&phones_path).context("reading the phone inventory (see --phones)")?;
    Ok(load_manifest(manifest, &phones)?)
}

fn ess_generate(a: EssGenerateArgs) -> anyhow::Result<()> {
    let spec = a.sweep.spec()?;
    write_wav(&generate_ess(&spec)?, &a.out, Encoding::Float32)?;
    if let Some(inv) = &a.inverse {
        write_wav(&inverse_filter(&spec)?, inv, Encoding::Float32)?;
    }
    Ok(())
}

fn ir_estimate(a: IrEstimateArgs) -> anyhow::Result<()> {
    let spec = a.sweep.spec()?;
    let recording = read_wav(&a.recording)?;
    let len = (a.length * SAMPLE_RATE as f64).round() as usize;
    let ir = estimate_ir(&recording, &spec, len)?;
    write_ir(&ir, &a.out)?;
    Ok(())
}

fn ir_synth(a: IrSynthArgs) -> anyhow::Result<()> {
    let seconds = a.length.unwrap_or(a.t60);
    let length = (seconds * SAMPLE_RATE as f64).ceil() as usize + a.delay;
    let ir = synth_ir_with(&SynthIrSpec {
        t60: a.t60,
        length,
        sample_rate: SAMPLE_RATE,
        direct_delay: a.delay,
        drr_db: a.drr,
        seed: a.seed,
    })?;
    write_ir(&ir, &a.out)?;
    Ok(())
}

fn t60(a: T60Args) -> anyhow::Result<()> {
    let analysis = estimate_t60(&read_ir(&a.ir)?)?;
    println!("t60\t{:.4}", analysis.t60);
    println!("fit_range_db\t{:.1}\t{:.1}", analysis.fit_range.0, analysis.fit_range.1);
    Ok(())
}

fn contaminate(a: ContaminateArgs) -> anyhow::Result<()> {
    let manifest = a.input.load()?;
    let spec = ContaminationSpec {
        noise: a.noise.as_ref().map(read_wav).transpose()?,
        target_snr_db: a.snr,
        snr_jitter_db: a.snr_jitter,
        noise_offset_seed: a.seed,
        ..ContaminationSpec::reverb_only(read_ir(&a.ir)?)
    };
    let out = contaminate_corpus(&manifest, spec, &a.out)?;
    eprintln!("contaminated {} utterances into {}", out.len(), a.out.display());
    Ok(())
}

fn feats(a: FeatsArgs) -> anyhow::Result<()> {
    let manifest = a.input.load()?;
    let frontend = Frontend::default().with_window(ContextWindowSpec::new(a.past, a.future));
    let stats = a.stats.as_ref().map(archive::read_stats).transpose()?;
    let set = compute_features(&manifest, &frontend, stats)?;
    set.write(&a.out)?;
    eprintln!("{} utterances, {} dims", set.utterances.len(), set.dim());
    Ok(())
}

/// Features from a directory, or unspliced features normalized on the
/// manifest itself.
fn aligner_features(manifest: &Manifest, dir: Option<&Path>) -> anyhow::Result<FeatureSet> {
    Ok(match dir {
        Some(d) => FeatureSet::read(d)?,
        None => compute_features(manifest, &Frontend::default().with_window(ContextWindowSpec::new(0, 0)), None)?,
    })
}

fn utterances<'a>(manifest: &'a Manifest, set: &'a FeatureSet) -> anyhow::Result<Vec<Utterance<'a>>> {
    let feats = set.for_manifest(manifest)?;
    Ok(manifest
        .records
        .iter()
        .zip(feats)
        .map(|(r, f)| Utterance {
            id: &r.id,
            features: f,
            transcript: &r.transcript,
        })
        .collect())
}

fn align_train(a: AlignTrainArgs) -> anyhow::Result<()> {
    let manifest = a.input.load()?;
    let set = aligner_features(&manifest, a.feats.as_deref())?;
    let utts = utterances(&manifest, &set)?;
    let init = flat_start(&manifest.phones, &utts)?;
    let outcome = em_train(&init, &utts, &EmConfig::growing(a.iterations, a.max_mixtures))?;
    for (k, ll) in outcome.log_likelihood.iter().enumerate() {
        eprintln!("iteration {k}\tlog_likelihood {ll:.3}");
    }
    write_gmm(&outcome.model, &a.out)?;
    Ok(())
}

fn align(a: AlignArgs) -> anyhow::Result<()> {
    let model = read_gmm(&a.model)?;
    let manifest = a.input.load()?;
    if model.phones() != &manifest.phones {
        bail!("aligner phone set differs from the manifest's");
    }
    let set = aligner_features(&manifest, a.feats.as_deref())?;
    if set.dim() != model.dim() {
        bail!("features have {} dims, aligner expects {}", set.dim(), model.dim());
    }
    let utts = utterances(&manifest, &set)?;
    let alignments = align_corpus(&model, &utts)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let rows: Vec<(String, Vec<u32>)> = alignments.into_iter().map(|al| (al.utterance_id, al.states)).collect();
    archive::write_labels(a.out.join("ali.rvk"), &rows)?;
    Ok(())
}

/// Labels for every record, carried onto the feature time base of `set`.
fn labels_for(manifest: &Manifest, set: &FeatureSet, source: &str) -> anyhow::Result<Vec<Vec<u32>>> {
    let feats = set.for_manifest(manifest)?;
    let archived = if source == "oracle" {
        None
    } else {
        Some(archive::read_labels(source)?)
    };
    manifest
        .records
        .iter()
        .zip(feats)
        .map(|(r, f)| {
            let states = match &archived {
                None => r
                    .load_labels()?
                    .with_context(|| format!("utterance {} has no oracle labels", r.id))?,
                Some(all) => all
                    .iter()
                    .find(|(id, _)| id == &r.id)
                    .map(|(_, l)| l.clone())
                    .with_context(|| format!("no alignment for utterance {}", r.id))?,
            };
            let carried = transfer_alignment(&Alignment::new(r.id.clone(), states), f.rows())
                .with_context(|| format!("utterance {}", r.id))?;
            Ok(carried.alignment.states)
        })
        .collect()
}

fn frame_set(manifest: &Manifest, set: &FeatureSet, labels: &[Vec<u32>]) -> anyhow::Result<FrameSet> {
    let mut out = FrameSet::new(set.dim(), manifest.phones.num_states());
    for (f, l) in set.for_manifest(manifest)?.into_iter().zip(labels) {
        out.push(f, l)?;
    }
    Ok(out)
}

struct Prepared {
    phones: PhoneSet,
    set: FeatureSet,
    frames: FrameSet,
}

fn prepare(data: &LabeledData) -> anyhow::Result<Prepared> {
    let manifest = data.input.load()?;
    let set = FeatureSet::read(&data.feats)?;
    let labels = labels_for(&manifest, &set, &data.labels)?;
    let frames = frame_set(&manifest, &set, &labels)?;
    Ok(Prepared {
        phones: manifest.phones,
        set,
        frames,
    })
}

fn prepare_dev(dev: &DevData, phones_hint: Option<&Path>, train: &Prepared) -> anyhow::Result<FrameSet> {
    let manifest = load(&dev.dev_manifest, phones_hint)?;
    if manifest.phones != train.phones {
        bail!("dev phone set differs from the training phone set");
    }
    let set = FeatureSet::read(&dev.dev_feats)?;
    if set.window != train.set.window || set.feature_config != train.set.feature_config {
        bail!("dev features were extracted with different frontend settings");
    }
    let labels = labels_for(&manifest, &set, &dev.dev_labels)?;
    frame_set(&manifest, &set, &labels)
}

fn report_history(history: &TrainHistory) {
    for r in &history.records {
        eprintln!(
            "epoch {}\tlr {}\ttrain_ce {:.4}\tdev_acc {:.2}",
            r.epoch, r.learning_rate, r.train_cross_entropy, r.dev_accuracy
        );
    }
    eprintln!(
        "epochs_to_converge {}\tbest_epoch {}\tbest_dev_acc {:.2}",
        history.epochs_to_converge,
        history.best_epoch,
        history.best_dev_accuracy()
    );
}

fn schedule(args: &ScheduleArgs, lr: f64) -> TrainSchedule {
    TrainSchedule {
        initial_lr: lr,
        max_epochs: args.max_epochs,
        batch_size: args.batch_size,
        seed: args.seed,
        ..TrainSchedule::default()
    }
}

fn save(model: MlpModel<f32>, set: &FeatureSet, path: &Path) -> anyhow::Result<()> {
    ModelFile {
        model,
        window: set.window,
        feature_config: set.feature_config,
    }
    .write(path)?;
    Ok(())
}

fn load_compatible(path: &Path, set: &FeatureSet) -> anyhow::Result<MlpModel<f32>> {
    let file = ModelFile::read(path)?;
    if file.window != set.window || file.feature_config != set.feature_config {
        bail!(
            "{} expects {} features (frontend {:016x}), got {} ({:016x})",
            path.display(),
            file.window.label(),
            file.feature_config,
            set.window.label(),
            set.feature_config
        );
    }
    Ok(file.model)
}

fn train_cmd(a: TrainArgs) -> anyhow::Result<()> {
    let data = prepare(&a.data)?;
    let dev = prepare_dev(&a.dev, a.data.input.phones.as_deref(), &data)?;
    let init = match &a.init {
        Some(p) => load_compatible(p, &data.set)?,
        None => {
            let layout = Layout::mlp(data.set.dim(), a.hidden_layers, a.hidden_width, data.phones.num_states())?;
            MlpModel::init_random(&layout, rng::derive_seed(a.schedule.seed, "init"))
        }
    };
    let (model, history) = train(&init, &data.frames, &dev, &schedule(&a.schedule, a.lr))?;
    report_history(&history);
    save(model, &data.set, &a.out)
}

fn pretrain_rbm(a: PretrainRbmArgs) -> anyhow::Result<()> {
    let manifest = a.input.load()?;
    let set = FeatureSet::read(&a.feats)?;
    // Labels are not used; a placeholder class keeps the frame set valid.
    let mut frames = FrameSet::new(set.dim(), manifest.phones.num_states());
    for f in set.for_manifest(&manifest)? {
        frames.push(f, &vec![0; f.rows()])?;
    }
    let layout = Layout::mlp(set.dim(), a.hidden_layers, a.hidden_width, manifest.phones.num_states())?;
    let config = RbmConfig {
        epochs_per_layer: a.epochs,
        lr_gb: a.lr_gb,
        lr_bb: a.lr_bb,
        seed: a.seed,
        ..RbmConfig::default()
    };
    let (model, report) = rbm_pretrain::<f32>(&frames, &layout, &config)?;
    for (layer, errs) in report.reconstruction_error.iter().enumerate() {
        let errs: Vec<String> = errs.iter().map(|e| format!("{e:.5}")).collect();
        eprintln!("layer {}\treconstruction_error {}", layer + 1, errs.join(" "));
    }
    save(model, &set, &a.out)
}

fn pretrain_ct(a: PretrainCtArgs) -> anyhow::Result<()> {
    let data = prepare(&a.data)?;
    let dev = prepare_dev(&a.dev, a.data.input.phones.as_deref(), &data)?;
    let ct = load_compatible(&a.ct_model, &data.set)?;
    let (model, history) = ct_pretrain_transfer(&ct, &data.frames, &dev, a.lr, &schedule(&a.schedule, a.lr))?;
    report_history(&history);
    save(model, &data.set, &a.out)
}

fn frame_acc(a: FrameAccArgs) -> anyhow::Result<()> {
    let data = prepare(&a.data)?;
    let model = load_compatible(&a.model, &data.set)?;
    println!("{:.2}", data.frames.accuracy(&model)?);
    Ok(())
}

fn decode(a: DecodeArgs) -> anyhow::Result<()> {
    let manifest = a.input.load()?;
    let set = FeatureSet::read(&a.feats)?;
    let model = load_compatible(&a.model, &set)?;
    if model.num_classes() != manifest.phones.num_states() {
        bail!(
            "model has {} outputs, phone set needs {}",
            model.num_classes(),
            manifest.phones.num_states()
        );
    }
    let priors: Vec<f64> = model.log_priors().iter().map(|l| l.exp()).collect();
    let graph = PhoneLoopGraph::new(manifest.phones.len())?
        .with_self_loop(a.self_loop)?
        .with_insertion_penalty(a.ins_penalty);
    let mut out = String::new();
    for (r, f) in manifest.records.iter().zip(set.for_manifest(&manifest)?) {
        let post = model.forward(f)?;
        let ll = posteriors_to_loglik(&post, &priors, a.scale)?;
        let hyp = phone_loop_decode(&ll, &graph).with_context(|| format!("utterance {}", r.id))?;
        out.push_str(&format!("{}\t{}\n", r.id, manifest.phones.render(&hyp)));
    }
    fs::write(&a.out, out).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn score(a: ScoreArgs) -> anyhow::Result<()> {
    let manifest = load(&a.reference, a.phones.as_deref())?;
    let text = fs::read_to_string(&a.hyp).with_context(|| format!("reading {}", a.hyp.display()))?;
    let mut hyps = std::collections::HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, phones) = line.split_once('\t').unwrap_or((line, ""));
        let phones = manifest
            .phones
            .parse(phones)
            .with_context(|| format!("{}:{}", a.hyp.display(), i + 1))?;
        hyps.insert(id.to_string(), phones);
    }
    let mut report = ScoreReport::default();
    for r in &manifest.records {
        let hyp = hyps
            .get(&r.id)
            .with_context(|| format!("no hypothesis for utterance {}", r.id))?;
        report.add(&r.id, &r.transcript, hyp)?;
    }
    let tsv = score_report_tsv(&report);
    match &a.out {
        Some(p) => fs::write(p, tsv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{tsv}"),
    }
    Ok(())
}

fn synth_corpus(a: SynthCorpusArgs) -> anyhow::Result<()> {
    let spec = SyntheticCorpusSpec {
        num_phones: a.num_phones,
        seed: a.seed,
        ..SyntheticCorpusSpec::default()
    }
    .split(&a.split, a.utterances);
    let manifest = write_synth_corpus(&spec, &a.out)?;
    eprintln!("wrote {} utterances to {}", manifest.len(), a.out.display());
    Ok(())
}

fn experiment(a: ExperimentArgs) -> anyhow::Result<()> {
    let config = load_config(&a.config)?;
    let start = std::time::Instant::now();
    let quiet = a.quiet;
    let mut progress = |m: &str| {
        if !quiet {
            eprintln!("[{:8.1}s] {m}", start.elapsed().as_secs_f64());
        }
    };
    let report = run_experiment(&config, &mut progress)?;
    let (tsv, md) = write_report(&report, &a.out)?;
    if !quiet {
        eprintln!("wrote {} and {}", tsv.display(), md.display());
    }
    Ok(())
}
