//! `RVK1` binary matrices: magic, u32 rows, u32 cols, u8 dtype
//! (0 = f32, 1 = u32), then the row-major little-endian payload.
//!
//! Per-utterance data (features, alignments) is stored as one archive with
//! all utterances stacked, plus a text index of `id<TAB>start<TAB>end` row
//! ranges.

use std::fs;
use std::io::Write;
use std::path::Path;

use revkit_core::features::{FeatureMatrix, NormalizationStats};

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RVK1";
const HEADER_LEN: usize = 13;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    F32(Vec<f32>),
    U32(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub rows: usize,
    pub cols: usize,
    pub payload: Payload,
}

impl Archive {
    pub fn f32(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        Self::checked(rows, cols, data.len(), Payload::F32(data))
    }

    pub fn u32(rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        Self::checked(rows, cols, data.len(), Payload::U32(data))
    }

    fn checked(rows: usize, cols: usize, len: usize, payload: Payload) -> Result<Self> {
        if rows.checked_mul(cols) != Some(len) {
            return Err(Error::Invalid(format!("{len} values do not fill a {rows}x{cols} matrix")));
        }
        if rows > u32::MAX as usize || cols > u32::MAX as usize {
            return Err(Error::Invalid(format!("{rows}x{cols} matrix exceeds the archive limits")));
        }
        Ok(Self { rows, cols, payload })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (code, n) = match &self.payload {
            Payload::F32(v) => (0u8, v.len()),
            Payload::U32(v) => (1u8, v.len()),
        };
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * n);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        out.push(code);
        match &self.payload {
            Payload::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Payload::U32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(Error::format(path, "not an RVK1 archive"));
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        let (rows, cols) = (word(4), word(8));
        let body = &bytes[HEADER_LEN..];
        let n = rows
            .checked_mul(cols)
            .filter(|n| n.checked_mul(4) == Some(body.len()))
            .ok_or_else(|| {
                Error::format(path, format!("payload of {} bytes does not match {rows}x{cols}", body.len()))
            })?;
        let words = body.chunks_exact(4).map(|c| c.try_into().unwrap());
        let payload = match bytes[12] {
            0 => Payload::F32(words.map(f32::from_le_bytes).collect()),
            1 => Payload::U32(words.map(u32::from_le_bytes).collect()),
            code => return Err(Error::format(path, format!("unknown dtype code {code}"))),
        };
        debug_assert_eq!(
            n,
            match &payload {
                Payload::F32(v) => v.len(),
                Payload::U32(v) => v.len(),
            }
        );
        Ok(Self { rows, cols, payload })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(Error::io(path))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(Error::io(path))?;
        Self::from_bytes(&bytes, path)
    }

    pub fn into_f32(self, path: &Path) -> Result<Vec<f32>> {
        match self.payload {
            Payload::F32(v) => Ok(v),
            Payload::U32(_) => Err(Error::format(path, "expected f32 payload, found u32")),
        }
    }

    pub fn into_u32(self, path: &Path) -> Result<Vec<u32>> {
        match self.payload {
            Payload::U32(v) => Ok(v),
            Payload::F32(_) => Err(Error::format(path, "expected u32 payload, found f32")),
        }
    }
}

/// Row range of one utterance inside a stacked archive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub id: String,
    pub start: usize,
    pub end: usize,
}

pub fn index_path(archive: &Path) -> std::path::PathBuf {
    archive.with_extension("index")
}

fn write_index(path: &Path, entries: &[IndexEntry]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(Error::io(path))?;
    for e in entries {
        writeln!(f, "{}\t{}\t{}", e.id, e.start, e.end).map_err(Error::io(path))?;
    }
    Ok(())
}

fn read_index(path: &Path, rows: usize) -> Result<Vec<IndexEntry>> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let mut out = Vec::new();
    let mut expected_start = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let bad = || Error::parse(path, i + 1, format!("expected id<TAB>start<TAB>end, got {line:?}"));
        if fields.len() != 3 {
            return Err(bad());
        }
        let start: usize = fields[1].parse().map_err(|_| bad())?;
        let end: usize = fields[2].parse().map_err(|_| bad())?;
        if start != expected_start || end < start || end > rows {
            return Err(Error::parse(path, i + 1, format!("row range {start}..{end} is not contiguous")));
        }
        expected_start = end;
        out.push(IndexEntry {
            id: fields[0].to_string(),
            start,
            end,
        });
    }
    if expected_start != rows {
        return Err(Error::format(path, format!("index covers {expected_start} of {rows} rows")));
    }
    Ok(out)
}

/// Writes utterance matrices stacked into `path` and their index next to it.
pub fn write_features(path: impl AsRef<Path>, utts: &[(String, FeatureMatrix)]) -> Result<()> {
    let path = path.as_ref();
    let cols = utts.first().map_or(0, |(_, f)| f.cols());
    let mut data = Vec::new();
    let mut index = Vec::with_capacity(utts.len());
    for (id, f) in utts {
        if f.cols() != cols {
            return Err(Error::Invalid(format!("utterance {id} has {} columns, expected {cols}", f.cols())));
        }
        let start = data.len() / cols.max(1);
        data.extend_from_slice(f.data());
        index.push(IndexEntry {
            id: id.clone(),
            start,
            end: start + f.rows(),
        });
    }
    let rows = index.last().map_or(0, |e| e.end);
    Archive::f32(rows, cols, data)?.write(path)?;
    write_index(&index_path(path), &index)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<(String, FeatureMatrix)>> {
    let path = path.as_ref();
    let archive = Archive::read(path)?;
    let (rows, cols) = (archive.rows, archive.cols);
    let data = archive.into_f32(path)?;
    let index = read_index(&index_path(path), rows)?;
    index
        .into_iter()
        .map(|e| {
            let block = data[e.start * cols..e.end * cols].to_vec();
            Ok((e.id, FeatureMatrix::new(e.end - e.start, cols, block)?))
        })
        .collect()
}

/// Writes per-utterance label sequences as a one-column u32 archive.
pub fn write_labels(path: impl AsRef<Path>, utts: &[(String, Vec<u32>)]) -> Result<()> {
    let path = path.as_ref();
    let mut data = Vec::new();
    let mut index = Vec::with_capacity(utts.len());
    for (id, labels) in utts {
        let start = data.len();
        data.extend_from_slice(labels);
        index.push(IndexEntry {
            id: id.clone(),
            start,
            end: data.len(),
        });
    }
    Archive::u32(data.len(), 1, data)?.write(path)?;
    write_index(&index_path(path), &index)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<(String, Vec<u32>)>> {
    let path = path.as_ref();
    let archive = Archive::read(path)?;
    if archive.cols != 1 {
        return Err(Error::format(path, format!("label archive must have one column, found {}", archive.cols)));
    }
    let rows = archive.rows;
    let data = archive.into_u32(path)?;
    let index = read_index(&index_path(path), rows)?;
    Ok(index.into_iter().map(|e| (e.id, data[e.start..e.end].to_vec())).collect())
}

/// One label sequence in a standalone archive without an index.
pub fn write_label_file(path: impl AsRef<Path>, labels: &[u32]) -> Result<()> {
    Archive::u32(labels.len(), 1, labels.to_vec())?.write(path)
}

pub fn read_label_file(path: impl AsRef<Path>) -> Result<Vec<u32>> {
    let path = path.as_ref();
    let archive = Archive::read(path)?;
    if archive.cols != 1 {
        return Err(Error::format(path, format!("label file must have one column, found {}", archive.cols)));
    }
    archive.into_u32(path)
}

/// Normalization stats as a 2-row archive: mean, then variance.
pub fn write_stats(path: impl AsRef<Path>, stats: &NormalizationStats) -> Result<()> {
    let mut data: Vec<f32> = stats.mean.iter().map(|&v| v as f32).collect();
    data.extend(stats.variance.iter().map(|&v| v as f32));
    Archive::f32(2, stats.dim(), data)?.write(path)
}

pub fn read_stats(path: impl AsRef<Path>) -> Result<NormalizationStats> {
    let path = path.as_ref();
    let archive = Archive::read(path)?;
    if archive.rows != 2 {
        return Err(Error::format(path, format!("stats archive must have 2 rows, found {}", archive.rows)));
    }
    let cols = archive.cols;
    let data = archive.into_f32(path)?;
    Ok(NormalizationStats {
        mean: data[..cols].iter().map(|&v| v as f64).collect(),
        variance: data[cols..].iter().map(|&v| v as f64).collect(),
        count: 0,
    })
}
