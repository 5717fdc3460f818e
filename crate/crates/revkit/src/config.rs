//! Flat `key = value` experiment configuration. Blank lines and `#` comments
//! are ignored; lists are comma-separated. Keys not given keep their
//! defaults.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use revkit_core::experiment::ExperimentConfig;
use revkit_core::features::ContextWindowSpec;

use crate::{Error, Result};

fn parse_value<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("bad value {value:?}: {e}"))
}

fn parse_list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_value)
        .collect()
}

fn parse_windows(value: &str) -> std::result::Result<Vec<ContextWindowSpec>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| ContextWindowSpec::parse(s).ok_or_else(|| format!("bad context window {s:?} (expected e.g. P8-F8)")))
        .collect()
}

/// Sets one field; `Err` carries a message without location.
pub fn set_key(config: &mut ExperimentConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    let c = config;
    match key {
        "kind" => c.kind = parse_value(value)?,
        "condition" => c.condition = parse_value(value)?,
        "windows" => c.windows = parse_windows(value)?,
        "supervision" => c.supervision = parse_value(value)?,
        "pretraining" => c.pretraining = parse_value(value)?,
        "seeds" => c.seeds = parse_list(value)?,
        "t60" => c.t60 = parse_value(value)?,
        "drr_db" => c.drr_db = parse_value(value)?,
        "snr_db" => c.snr_db = parse_value(value)?,
        "num_phones" => c.num_phones = parse_value(value)?,
        "train_utterances" => c.train_utterances = parse_value(value)?,
        "dev_utterances" => c.dev_utterances = parse_value(value)?,
        "test_utterances" => c.test_utterances = parse_value(value)?,
        "hidden_layers" => c.hidden_layers = parse_value(value)?,
        "hidden_width" => c.hidden_width = parse_value(value)?,
        "em_iterations" => c.em_iterations = parse_value(value)?,
        "max_mixtures" => c.max_mixtures = parse_value(value)?,
        "acoustic_scale" => c.acoustic_scale = parse_value(value)?,
        "insertion_penalty" => c.insertion_penalty = parse_value(value)?,
        "schedule.initial_lr" => c.schedule.initial_lr = parse_value(value)?,
        "schedule.keep_threshold" => c.schedule.keep_threshold = parse_value(value)?,
        "schedule.stop_threshold" => c.schedule.stop_threshold = parse_value(value)?,
        "schedule.max_epochs" => c.schedule.max_epochs = parse_value(value)?,
        "schedule.batch_size" => c.schedule.batch_size = parse_value(value)?,
        "schedule.momentum" => c.schedule.momentum = parse_value(value)?,
        "schedule.summed_gradient" => c.schedule.summed_gradient = parse_value(value)?,
        "schedule.seed" => c.schedule.seed = parse_value(value)?,
        "rbm.epochs_per_layer" => c.rbm.epochs_per_layer = parse_value(value)?,
        "rbm.lr_gb" => c.rbm.lr_gb = parse_value(value)?,
        "rbm.lr_bb" => c.rbm.lr_bb = parse_value(value)?,
        "rbm.batch_size" => c.rbm.batch_size = parse_value(value)?,
        "rbm.seed" => c.rbm.seed = parse_value(value)?,
        other => return Err(format!("unknown key {other:?}")),
    }
    Ok(())
}

pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, i + 1, format!("expected key = value, got {line:?}")))?;
        let value = value.trim().trim_matches('"');
        set_key(&mut config, key.trim(), value).map_err(|m| Error::parse(path, i + 1, m))?;
    }
    config.validate().map_err(|e| Error::format(path, e.to_string()))?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    parse_config(&text, path)
}

/// Every field, in a form [`parse_config`] reads back to the same value.
pub fn config_to_string(c: &ExperimentConfig) -> String {
    let list = |v: Vec<String>| v.join(",");
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("kind", c.kind.to_string());
    kv("condition", c.condition.to_string());
    kv("windows", list(c.windows.iter().map(|w| w.label()).collect()));
    kv("supervision", c.supervision.to_string());
    kv("pretraining", c.pretraining.to_string());
    kv("seeds", list(c.seeds.iter().map(|s| s.to_string()).collect()));
    kv("t60", c.t60.to_string());
    kv("drr_db", c.drr_db.to_string());
    kv("snr_db", c.snr_db.to_string());
    kv("num_phones", c.num_phones.to_string());
    kv("train_utterances", c.train_utterances.to_string());
    kv("dev_utterances", c.dev_utterances.to_string());
    kv("test_utterances", c.test_utterances.to_string());
    kv("hidden_layers", c.hidden_layers.to_string());
    kv("hidden_width", c.hidden_width.to_string());
    kv("em_iterations", c.em_iterations.to_string());
    kv("max_mixtures", c.max_mixtures.to_string());
    kv("acoustic_scale", c.acoustic_scale.to_string());
    kv("insertion_penalty", c.insertion_penalty.to_string());
    kv("schedule.initial_lr", c.schedule.initial_lr.to_string());
    kv("schedule.keep_threshold", c.schedule.keep_threshold.to_string());
    kv("schedule.stop_threshold", c.schedule.stop_threshold.to_string());
    kv("schedule.max_epochs", c.schedule.max_epochs.to_string());
    kv("schedule.batch_size", c.schedule.batch_size.to_string());
    kv("schedule.momentum", c.schedule.momentum.to_string());
    kv("schedule.summed_gradient", c.schedule.summed_gradient.to_string());
    kv("schedule.seed", c.schedule.seed.to_string());
    kv("rbm.epochs_per_layer", c.rbm.epochs_per_layer.to_string());
    kv("rbm.lr_gb", c.rbm.lr_gb.to_string());
    kv("rbm.lr_bb", c.rbm.lr_bb.to_string());
    kv("rbm.batch_size", c.rbm.batch_size.to_string());
    kv("rbm.seed", c.rbm.seed.to_string());
    s
}
