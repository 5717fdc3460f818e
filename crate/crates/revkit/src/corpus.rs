//! Whole-corpus operations that read and write audio on disk.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use revkit_core::contaminate::{ContaminationSpec, Contaminator, MixReport};
use revkit_core::experiment::Condition;
use revkit_core::synth::{synth_corpus, SyntheticCorpusSpec};

use crate::manifest::{write_phone_set, Manifest, Record};
use crate::wav::{write_wav, Encoding};
use crate::{archive, Error, Result};

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const PHONES_FILE: &str = "phones.txt";
pub const MIX_REPORT_FILE: &str = "mix_report.tsv";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))
}

fn append_mix_reports(path: &Path, rows: &[(String, MixReport)]) -> Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(Error::io(path))?;
    let mut text = String::new();
    if fresh {
        text.push_str("id\talpha\tachieved_snr_db\tnoise_offset\n");
    }
    for (id, r) in rows {
        text.push_str(&format!("{id}\t{:.6e}\t{:.4}\t{}\n", r.alpha, r.achieved_snr_db, r.noise_offset));
    }
    f.write_all(text.as_bytes()).map_err(Error::io(path))
}

/// Contaminates every utterance into `out_dir/<id>.wav` (float32) and writes
/// `out_dir/manifest.tsv`. Oracle label paths carry over because the output
/// keeps the clean time base. Mix reports are appended to
/// `out_dir/mix_report.tsv` when noise is added.
pub fn contaminate_corpus(manifest: &Manifest, spec: ContaminationSpec, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    create_dir(out_dir)?;
    let condition = if spec.noise.is_some() { Condition::RevNoise } else { Condition::Rev };
    let contaminator = Contaminator::new(spec);
    let mut records = Vec::with_capacity(manifest.len());
    let mut reports = Vec::new();
    for r in &manifest.records {
        let clean = r.load_audio()?;
        let (distant, report) = contaminator
            .contaminate(&r.id, &clean)
            .map_err(|e| Error::Invalid(format!("utterance {}: {e}", r.id)))?;
        let audio = out_dir.join(format!("{}.wav", r.id));
        write_wav(&distant, &audio, Encoding::Float32)?;
        if let Some(report) = report {
            reports.push((r.id.clone(), report));
        }
        records.push(Record {
            audio,
            condition,
            ..r.clone()
        });
    }
    if !reports.is_empty() {
        append_mix_reports(&out_dir.join(MIX_REPORT_FILE), &reports)?;
    }
    let out = Manifest {
        phones: manifest.phones.clone(),
        records,
    };
    out.write(out_dir.join(MANIFEST_FILE))?;
    write_phone_set(out_dir.join(PHONES_FILE), &out.phones)?;
    Ok(out)
}

/// Writes a synthetic corpus: `wav/<id>.wav` (float32), oracle labels in
/// `labels/<id>.rvk`, `phones.txt` and `manifest.tsv`.
pub fn write_synth_corpus(spec: &SyntheticCorpusSpec, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    let out_dir = out_dir.as_ref();
    let (wav_dir, label_dir) = (out_dir.join("wav"), out_dir.join("labels"));
    create_dir(&wav_dir)?;
    create_dir(&label_dir)?;
    let phones = spec.phone_set();
    let mut records = Vec::with_capacity(spec.utterances);
    for u in synth_corpus(spec)? {
        let audio = wav_dir.join(format!("{}.wav", u.id));
        let labels = label_dir.join(format!("{}.rvk", u.id));
        write_wav(&u.audio, &audio, Encoding::Float32)?;
        archive::write_label_file(&labels, &u.labels)?;
        records.push(Record {
            id: u.id,
            audio,
            transcript: u.phones,
            condition: Condition::Clean,
            labels: Some(labels),
        });
    }
    let manifest = Manifest { phones, records };
    manifest.write(out_dir.join(MANIFEST_FILE))?;
    write_phone_set(out_dir.join(PHONES_FILE), &manifest.phones)?;
    Ok(manifest)
}
