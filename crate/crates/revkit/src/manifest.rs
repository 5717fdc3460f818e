//! Corpus manifests: one utterance per line,
//! `id<TAB>audio<TAB>phones<TAB>condition[<TAB>labels]`.
//!
//! Relative audio and label paths are resolved against the manifest's
//! directory.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use revkit_core::experiment::Condition;
use revkit_core::hmm::{PhoneSet, SILENCE};
use revkit_core::Waveform;

use crate::{archive, wav, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub audio: PathBuf,
    pub transcript: Vec<usize>,
    pub condition: Condition,
    pub labels: Option<PathBuf>,
}

impl Record {
    pub fn load_audio(&self) -> Result<Waveform> {
        wav::read_wav(&self.audio)
    }

    pub fn load_labels(&self) -> Result<Option<Vec<u32>>> {
        self.labels.as_ref().map(archive::read_label_file).transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub phones: PhoneSet,
    pub records: Vec<Record>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.id == id)
    }

    /// Writes the manifest with paths relative to `path`'s directory where
    /// possible. Paths outside that directory are written absolute, since a
    /// relative one would be resolved against the new manifest's location.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new(""));
        let rel = |p: &Path| match p.strip_prefix(base) {
            Ok(r) => r.display().to_string(),
            Err(_) => std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf()).display().to_string(),
        };
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}",
                r.id,
                rel(&r.audio),
                self.phones.render(&r.transcript),
                r.condition
            ));
            if let Some(l) = &r.labels {
                out.push('\t');
                out.push_str(&rel(l));
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(Error::io(path))
    }
}

pub fn parse_manifest(text: &str, phones: &PhoneSet, path: &Path) -> Result<Manifest> {
    let base = path.parent().unwrap_or(Path::new(""));
    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(4..=5).contains(&fields.len()) {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 4 or 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::parse(path, line_no, "empty utterance id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(path, line_no, format!("duplicate utterance id {id:?}")));
        }
        let transcript = phones.parse(fields[2]).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if transcript.is_empty() {
            return Err(Error::parse(path, line_no, "empty transcript"));
        }
        let condition: Condition = fields[3].parse().map_err(|e: revkit_core::Error| Error::parse(path, line_no, e.to_string()))?;
        let labels = fields.get(4).map(|s| s.trim()).filter(|s| !s.is_empty()).map(resolve);
        records.push(Record {
            id: id.to_string(),
            audio: resolve(fields[1].trim()),
            transcript,
            condition,
            labels,
        });
    }
    Ok(Manifest {
        phones: phones.clone(),
        records,
    })
}

pub fn load_manifest(path: impl AsRef<Path>, phones: &PhoneSet) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    parse_manifest(&text, phones, path)
}

/// Phone inventory file: whitespace-separated symbols, which must include
/// the silence phone `sil`.
pub fn read_phone_set(path: impl AsRef<Path>) -> Result<PhoneSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let symbols: Vec<&str> = text.split_whitespace().collect();
    PhoneSet::new(&symbols, SILENCE).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_phone_set(path: impl AsRef<Path>, phones: &PhoneSet) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(Error::io(path))?;
    writeln!(f, "{}", phones.symbols().join("\n")).map_err(Error::io(path))
}
