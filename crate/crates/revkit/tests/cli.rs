use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use revkit::archive;
use revkit::core::contaminate::{convolve, TrimPolicy};
use revkit::core::ir::{synth_ir, SweepSpec};
use revkit::core::synth::pink_noise;
use revkit::feats::FeatureSet;
use revkit::ir_io::read_ir;
use revkit::model_io::{read_gmm, ModelFile};
use revkit::wav::{read_wav, write_wav, Encoding};

fn revkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revkit")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = revkit(args);
    assert!(
        out.status.success(),
        "revkit {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Corpus {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Corpus {
    fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }
}

/// Clean and contaminated train/dev corpora with features and alignments.
fn prepared() -> Corpus {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let c = Corpus { _dir: dir, root };
    let p = |r: &str| c.path(r);
    ok(&["synth-corpus", "--utterances", "24", "--seed", "4", "--out", s(&p("tr"))]);
    ok(&["synth-corpus", "--utterances", "6", "--seed", "4", "--split", "dev", "--out", s(&p("dv"))]);
    ok(&["ir-synth", "--t60", "0.3", "--seed", "2", "--out", s(&p("room.wav"))]);
    let noise = pink_noise(48_000, 16000, 5).unwrap();
    write_wav(&noise, p("noise.wav"), Encoding::Float32).unwrap();
    for split in ["tr", "dv"] {
        ok(&[
            "contaminate",
            "--manifest",
            s(&p(&format!("{split}/manifest.tsv"))),
            "--ir",
            s(&p("room.wav")),
            "--noise",
            s(&p("noise.wav")),
            "--snr",
            "15",
            "--seed",
            "1",
            "--out",
            s(&p(&format!("{split}d"))),
        ]);
    }
    // Aligner on clean unspliced features; labels carried to distant audio.
    ok(&["feats", "--manifest", s(&p("tr/manifest.tsv")), "--past", "0", "--future", "0", "--out", s(&p("f0"))]);
    ok(&[
        "align-train",
        "--manifest",
        s(&p("tr/manifest.tsv")),
        "--feats",
        s(&p("f0")),
        "--iterations",
        "3",
        "--max-mixtures",
        "2",
        "--out",
        s(&p("gmm.txt")),
    ]);
    ok(&["align", "--model", s(&p("gmm.txt")), "--manifest", s(&p("tr/manifest.tsv")), "--feats", s(&p("f0")), "--out", s(&p("ali"))]);
    ok(&["feats", "--manifest", s(&p("trd/manifest.tsv")), "--past", "2", "--future", "2", "--out", s(&p("fd"))]);
    ok(&[
        "feats",
        "--manifest",
        s(&p("dvd/manifest.tsv")),
        "--past",
        "2",
        "--future",
        "2",
        "--stats",
        s(&p("fd/stats.rvk")),
        "--out",
        s(&p("fdd")),
    ]);
    c
}

fn train_args<'a>(c: &'a [PathBuf; 6], extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "--manifest",
        s(&c[0]),
        "--feats",
        s(&c[1]),
        "--labels",
        s(&c[2]),
        "--dev-manifest",
        s(&c[3]),
        "--dev-feats",
        s(&c[4]),
        "--dev-labels",
        "oracle",
        "--max-epochs",
        "3",
        "--out",
        s(&c[5]),
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn full_pipeline_through_the_cli() {
    let c = prepared();
    let p = |r: &str| c.path(r);

    let manifest = fs::read_to_string(p("trd/manifest.tsv")).unwrap();
    assert_eq!(manifest.lines().count(), 24);
    assert!(manifest.lines().all(|l| l.split('\t').nth(3) == Some("rev_noise")));
    let mix = fs::read_to_string(p("trd/mix_report.tsv")).unwrap();
    assert_eq!(mix.lines().count(), 25);
    for line in mix.lines().skip(1) {
        let snr: f64 = line.split('\t').nth(2).unwrap().parse().unwrap();
        assert!((snr - 15.0).abs() < 0.05, "{line}");
    }

    let gmm = read_gmm(p("gmm.txt")).unwrap();
    assert_eq!(gmm.dim(), 45);
    assert_eq!(gmm.num_states(), 30);
    let ali = archive::read_labels(p("ali/ali.rvk")).unwrap();
    assert_eq!(ali.len(), 24);
    let fd = FeatureSet::read(p("fd")).unwrap();
    assert_eq!(fd.dim(), 45 * 5);
    for ((id, states), (fid, f)) in ali.iter().zip(&fd.utterances) {
        assert_eq!(id, fid);
        assert_eq!(states.len(), f.rows());
    }

    let files = [
        p("trd/manifest.tsv"),
        p("fd"),
        p("ali/ali.rvk"),
        p("dvd/manifest.tsv"),
        p("fdd"),
        p("net.mdl"),
    ];
    ok(&[&["train"][..], &train_args(&files, &["--hidden-layers", "1", "--hidden-width", "32"])].concat());
    let model = ModelFile::read(p("net.mdl")).unwrap();
    assert_eq!(model.model.layout().to_string(), "225-32-30");
    assert_eq!(model.window.label(), "P2-F2");

    let acc: f64 = ok(&[
        "frame-acc",
        "--model",
        s(&p("net.mdl")),
        "--manifest",
        s(&p("dvd/manifest.tsv")),
        "--feats",
        s(&p("fdd")),
        "--labels",
        "oracle",
    ])
    .trim()
    .parse()
    .unwrap();
    assert!((0.0..=100.0).contains(&acc));

    ok(&[
        "decode",
        "--model",
        s(&p("net.mdl")),
        "--manifest",
        s(&p("dvd/manifest.tsv")),
        "--feats",
        s(&p("fdd")),
        "--scale",
        "1.0",
        "--ins-penalty",
        "-0.5",
        "--out",
        s(&p("hyp.tsv")),
    ]);
    let hyp = fs::read_to_string(p("hyp.tsv")).unwrap();
    assert_eq!(hyp.lines().count(), 6);
    let report = ok(&["score", "--ref", s(&p("dvd/manifest.tsv")), "--hyp", s(&p("hyp.tsv"))]);
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "id\tref_len\tsub\tdel\tins\tPER%");
    assert_eq!(lines.len(), 8);
    assert!(lines[7].starts_with("TOTAL\t"));

    // Scoring the references against themselves gives zero errors.
    let refs: String = fs::read_to_string(p("dvd/manifest.tsv"))
        .unwrap()
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            format!("{}\t{}\n", f[0], f[2])
        })
        .collect();
    fs::write(p("self.tsv"), refs).unwrap();
    let perfect = ok(&["score", "--ref", s(&p("dvd/manifest.tsv")), "--hyp", s(&p("self.tsv"))]);
    assert!(perfect.lines().last().unwrap().ends_with("\t0.00"), "{perfect}");
}

#[test]
fn pretraining_commands_produce_compatible_models() {
    let c = prepared();
    let p = |r: &str| c.path(r);
    ok(&[
        "pretrain-rbm",
        "--manifest",
        s(&p("trd/manifest.tsv")),
        "--feats",
        s(&p("fd")),
        "--hidden-layers",
        "2",
        "--hidden-width",
        "16",
        "--epochs",
        "1",
        "--out",
        s(&p("rbm.mdl")),
    ]);
    assert_eq!(ModelFile::read(p("rbm.mdl")).unwrap().model.layout().to_string(), "225-16-16-30");

    let files = [
        p("trd/manifest.tsv"),
        p("fd"),
        p("ali/ali.rvk"),
        p("dvd/manifest.tsv"),
        p("fdd"),
        p("fine.mdl"),
    ];
    ok(&[&["train"][..], &train_args(&files, &["--init", s(&p("rbm.mdl"))])].concat());
    assert_eq!(ModelFile::read(p("fine.mdl")).unwrap().model.layout().to_string(), "225-16-16-30");

    let ct_files = [
        p("trd/manifest.tsv"),
        p("fd"),
        p("ali/ali.rvk"),
        p("dvd/manifest.tsv"),
        p("fdd"),
        p("ct.mdl"),
    ];
    let out = revkit(&[&["pretrain-ct", "--ct-model", s(&p("fine.mdl"))][..], &train_args(&ct_files, &[])].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = String::from_utf8_lossy(&out.stderr);
    assert!(log.lines().next().unwrap().contains("lr 0.005"), "{log}");

    // A model whose context window differs from the features is refused.
    ok(&["feats", "--manifest", s(&p("dvd/manifest.tsv")), "--past", "1", "--future", "1", "--out", s(&p("f1"))]);
    let out = revkit(&[
        "frame-acc",
        "--model",
        s(&p("ct.mdl")),
        "--manifest",
        s(&p("dvd/manifest.tsv")),
        "--feats",
        s(&p("f1")),
        "--labels",
        "oracle",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("P2-F2"));
}

#[test]
fn sweep_measurement_recovers_the_room() {
    let dir = tempfile::tempdir().unwrap();
    let p = |r: &str| dir.path().join(r);
    ok(&["ess-generate", "--duration", "3", "--out", s(&p("sweep.wav")), "--inverse", s(&p("inv.wav"))]);
    let sweep = read_wav(p("sweep.wav")).unwrap();
    assert_eq!(sweep.len(), SweepSpec { duration: 3.0, ..SweepSpec::default() }.len());
    assert_eq!(read_wav(p("inv.wav")).unwrap().len(), sweep.len());

    let room = synth_ir(0.4, 6400, 16000, 0, 11).unwrap();
    let recording = convolve(&sweep, &room, TrimPolicy::Full).unwrap();
    write_wav(&recording, p("rec.wav"), Encoding::Float32).unwrap();
    ok(&["ir-estimate", "--recording", s(&p("rec.wav")), "--duration", "3", "--length", "0.4", "--out", s(&p("est.wav"))]);
    let est = read_ir(p("est.wav")).unwrap();
    assert_eq!(est.len(), 6400);
    let num: f64 = est.taps().iter().zip(room.taps()).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = room.taps().iter().map(|b| b * b).sum();
    assert!((num / den).sqrt() < 0.02, "relative error {}", (num / den).sqrt());

    let t60 = ok(&["t60", "--ir", s(&p("est.wav"))]);
    let value: f64 = t60.lines().next().unwrap().split('\t').nth(1).unwrap().parse().unwrap();
    assert!((0.36..=0.44).contains(&value), "{t60}");
}

#[test]
fn experiment_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "kind = single\ncondition = rev\nwindows = P1-F1\nseeds = 3\ntrain_utterances = 10\n\
         dev_utterances = 3\ntest_utterances = 3\nhidden_layers = 1\nhidden_width = 16\n\
         em_iterations = 2\nmax_mixtures = 1\nschedule.max_epochs = 2\npretraining = none\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["experiment", "--config", s(&cfg), "--out", s(&a), "--quiet"]);
    ok(&["experiment", "--config", s(&cfg), "--out", s(&b), "--quiet"]);
    let tsv = fs::read(a.join("report.tsv")).unwrap();
    assert_eq!(tsv, fs::read(b.join("report.tsv")).unwrap());
    assert_eq!(fs::read(a.join("report.md")).unwrap(), fs::read(b.join("report.md")).unwrap());
    let text = String::from_utf8(tsv).unwrap();
    assert!(text.starts_with("condition\twindow\tsupervision\tpretraining\tseed\tPER%\tframe_acc%\tepochs\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn bad_inputs_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.tsv");
    fs::write(dir.path().join("phones.txt"), "sil a b\n").unwrap();
    fs::write(&m, "u1\tu1.wav\tsil a sil\tclean\nu2\tu2.wav\tsil q sil\tclean\n").unwrap();
    let out = revkit(&["feats", "--manifest", s(&m), "--out", s(&dir.path().join("f"))]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("\"q\"") && err.contains(":2:"), "{err}");

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "kind = single\nlearning_rate = 3\n").unwrap();
    let out = revkit(&["experiment", "--config", s(&cfg), "--out", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rate"));
}
