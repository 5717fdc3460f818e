//! Feature directories: `feats.rvk` (+ `.index`) with every utterance's
//! normalized, spliced features, `stats.rvk` and `feats.info` naming the
//! context window and frontend hash.

use std::fs;
use std::path::{Path, PathBuf};

use revkit_core::features::{
    apply_normalizer, fit_normalizer, splice, ContextWindowSpec, FeatureMatrix, Frontend, NormalizationStats,
};

use crate::manifest::Manifest;
use crate::{archive, Error, Result};

#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub window: ContextWindowSpec,
    pub feature_config: u64,
    pub stats: NormalizationStats,
    pub utterances: Vec<(String, FeatureMatrix)>,
}

impl FeatureSet {
    pub fn dim(&self) -> usize {
        self.stats.dim()
    }

    pub fn get(&self, id: &str) -> Option<&FeatureMatrix> {
        self.utterances.iter().find(|(u, _)| u == id).map(|(_, f)| f)
    }

    /// Features in manifest order; every record must be present.
    pub fn for_manifest(&self, manifest: &Manifest) -> Result<Vec<&FeatureMatrix>> {
        manifest
            .records
            .iter()
            .map(|r| {
                self.get(&r.id)
                    .ok_or_else(|| Error::Invalid(format!("no features for utterance {}", r.id)))
            })
            .collect()
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(Error::io(dir))?;
        archive::write_features(dir.join("feats.rvk"), &self.utterances)?;
        archive::write_stats(dir.join("stats.rvk"), &self.stats)?;
        let info = dir.join("feats.info");
        fs::write(
            &info,
            format!("window {}\nfeature_config {:016x}\n", self.window.label(), self.feature_config),
        )
        .map_err(Error::io(&info))
    }

    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let info_path = dir.join("feats.info");
        let info = fs::read_to_string(&info_path).map_err(Error::io(&info_path))?;
        let mut window = None;
        let mut feature_config = None;
        for (i, line) in info.lines().enumerate() {
            match line.split_once(' ') {
                Some(("window", v)) => window = ContextWindowSpec::parse(v),
                Some(("feature_config", v)) => feature_config = u64::from_str_radix(v.trim(), 16).ok(),
                _ if line.trim().is_empty() => {}
                _ => return Err(Error::parse(&info_path, i + 1, format!("unexpected line {line:?}"))),
            }
        }
        let window = window.ok_or_else(|| Error::format(&info_path, "missing or bad window"))?;
        let feature_config = feature_config.ok_or_else(|| Error::format(&info_path, "missing or bad feature_config"))?;
        Ok(Self {
            window,
            feature_config,
            stats: archive::read_stats(dir.join("stats.rvk"))?,
            utterances: archive::read_features(dir.join("feats.rvk"))?,
        })
    }
}

/// Extracts spliced features for every record. Without `stats`, the
/// normalizer is fitted on this manifest.
pub fn compute_features(
    manifest: &Manifest,
    frontend: &Frontend,
    stats: Option<NormalizationStats>,
) -> Result<FeatureSet> {
    let mut spliced = Vec::with_capacity(manifest.len());
    for r in &manifest.records {
        let w = r.load_audio()?;
        let base = frontend
            .base_features(&w)
            .map_err(|e| Error::Invalid(format!("utterance {}: {e}", r.id)))?;
        spliced.push((r.id.clone(), splice(&base, frontend.window)));
    }
    let stats = match stats {
        Some(s) => s,
        None => fit_normalizer(spliced.iter().map(|(_, f)| f))?,
    };
    let utterances = spliced
        .into_iter()
        .map(|(id, f)| Ok((id, apply_normalizer(&f, &stats)?)))
        .collect::<Result<_>>()?;
    Ok(FeatureSet {
        window: frontend.window,
        feature_config: frontend.config_hash(),
        stats,
        utterances,
    })
}

pub fn stats_path(dir: &Path) -> PathBuf {
    dir.join("stats.rvk")
}
