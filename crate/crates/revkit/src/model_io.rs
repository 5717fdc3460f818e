//! Model files: the acoustic network (text header plus float32 payload) and
//! the GMM aligner (plain text).

use std::fs;
use std::path::Path;

use revkit_core::features::ContextWindowSpec;
use revkit_core::hmm::{DiagGmm, GmmAcousticModel, HmmTopology, PhoneSet, SILENCE};
use revkit_core::nnet::{Dense, Layout, MlpModel};

use crate::{Error, Result};

const MLP_MAGIC: &str = "RVKMLP 1";
const GMM_MAGIC: &str = "RVKGMM 1";
const END_HEADER: &str = "end_header";

/// A trained network with the frontend settings it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: MlpModel<f32>,
    pub window: ContextWindowSpec,
    pub feature_config: u64,
}

impl ModelFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let m = &self.model;
        let priors: Vec<String> = m.log_priors().iter().map(|p| format!("{p:e}")).collect();
        let header = format!(
            "{MLP_MAGIC}\nlayout {}\nactivations sigmoid softmax\nwindow {}\nfeature_config {:016x}\nlog_priors {}\n{END_HEADER}\n",
            m.layout(),
            self.window.label(),
            self.feature_config,
            priors.join(" "),
        );
        let mut out = header.into_bytes();
        for layer in m.layers() {
            for v in layer.weights().iter().chain(layer.bias()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |m: String| Error::format(path, m);
        let marker = format!("\n{END_HEADER}\n");
        let split = bytes
            .windows(marker.len())
            .position(|w| w == marker.as_bytes())
            .ok_or_else(|| bad("missing end_header".into()))?;
        let header = std::str::from_utf8(&bytes[..split]).map_err(|_| bad("header is not UTF-8".into()))?;
        let payload = &bytes[split + marker.len()..];
        let mut lines = header.lines();
        if lines.next() != Some(MLP_MAGIC) {
            return Err(bad(format!("not a model file (expected {MLP_MAGIC:?})")));
        }
        let mut layout = None;
        let mut window = None;
        let mut feature_config = None;
        let mut log_priors = None;
        for line in lines {
            let (key, value) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "layout" => layout = Some(Layout::parse(value).map_err(|e| bad(e.to_string()))?),
                "activations" => {
                    if value != "sigmoid softmax" {
                        return Err(bad(format!("unsupported activations {value:?}")));
                    }
                }
                "window" => {
                    window =
                        Some(ContextWindowSpec::parse(value).ok_or_else(|| bad(format!("bad window {value:?}")))?)
                }
                "feature_config" => {
                    feature_config = Some(
                        u64::from_str_radix(value, 16).map_err(|_| bad(format!("bad feature_config {value:?}")))?,
                    )
                }
                "log_priors" => {
                    log_priors = Some(
                        value
                            .split_whitespace()
                            .map(|v| v.parse::<f64>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| bad("bad log_priors".into()))?,
                    )
                }
                other => return Err(bad(format!("unknown header key {other:?}"))),
            }
        }
        let layout = layout.ok_or_else(|| bad("missing layout".into()))?;
        let window = window.ok_or_else(|| bad("missing window".into()))?;
        let feature_config = feature_config.ok_or_else(|| bad("missing feature_config".into()))?;
        let log_priors = log_priors.ok_or_else(|| bad("missing log_priors".into()))?;

        let expected: usize = layout.sizes().windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        if payload.len() != 4 * expected {
            return Err(bad(format!(
                "payload holds {} bytes, layout {layout} needs {}",
                payload.len(),
                4 * expected
            )));
        }
        let mut values = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()));
        let mut layers = Vec::new();
        for w in layout.sizes().windows(2) {
            let weights: Vec<f32> = values.by_ref().take(w[0] * w[1]).collect();
            let bias: Vec<f32> = values.by_ref().take(w[1]).collect();
            layers.push(Dense::new(w[0], w[1], weights, bias)?);
        }
        let model = MlpModel::from_parts(layers, log_priors).map_err(|e| bad(e.to_string()))?;
        Ok(Self {
            model,
            window,
            feature_config,
        })
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
}

pub fn gmm_to_string(model: &GmmAcousticModel) -> String {
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut s = format!(
        "{GMM_MAGIC}\nphones {}\ndim {}\nself_loops {}\n",
        model.phones().symbols().join(" "),
        model.dim(),
        join(model.topology().self_loops()),
    );
    for (i, g) in model.states().iter().enumerate() {
        s.push_str(&format!("state {i} {}\n", g.num_components()));
        for c in 0..g.num_components() {
            s.push_str(&format!("{} {} {}\n", g.weights()[c], join(g.mean(c)), join(g.variance(c))));
        }
    }
    s
}

pub fn gmm_from_str(text: &str, path: &Path) -> Result<GmmAcousticModel> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| {
        lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::format(path, format!("unexpected end of file, expected {what}")))
    };
    let floats = |line: usize, s: &str| -> Result<Vec<f64>> {
        s.split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| Error::parse(path, line, format!("bad number {v:?}"))))
            .collect()
    };
    let keyed = |line: usize, l: &'_ str, key: &str| -> Result<String> {
        l.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| Error::parse(path, line, format!("expected {key:?}")))
    };

    let (n, l) = next("header")?;
    if l != GMM_MAGIC {
        return Err(Error::parse(path, n, format!("not a GMM file (expected {GMM_MAGIC:?})")));
    }
    let (n, l) = next("phones")?;
    let symbols = keyed(n, l, "phones")?;
    let symbols: Vec<&str> = symbols.split_whitespace().collect();
    let phones = PhoneSet::new(&symbols, SILENCE).map_err(|e| Error::parse(path, n, e.to_string()))?;
    let (n, l) = next("dim")?;
    let dim: usize = keyed(n, l, "dim")?
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, n, "bad dim"))?;
    let (n, l) = next("self_loops")?;
    let loops = floats(n, &keyed(n, l, "self_loops")?)?;
    let topology = HmmTopology::new(loops).map_err(|e| Error::parse(path, n, e.to_string()))?;

    let mut states = Vec::with_capacity(phones.num_states());
    for s in 0..phones.num_states() {
        let (n, l) = next("state")?;
        let rest = keyed(n, l, "state")?;
        let parts: Vec<&str> = rest.split_whitespace().collect();
        let components = match parts.as_slice() {
            [id, k] if id.parse::<usize>().ok() == Some(s) => {
                k.parse::<usize>().map_err(|_| Error::parse(path, n, "bad component count"))?
            }
            _ => return Err(Error::parse(path, n, format!("expected \"state {s} <components>\""))),
        };
        let (mut w, mut means, mut vars) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..components {
            let (n, l) = next("component")?;
            let v = floats(n, l)?;
            if v.len() != 1 + 2 * dim {
                return Err(Error::parse(path, n, format!("expected {} values, found {}", 1 + 2 * dim, v.len())));
            }
            w.push(v[0]);
            means.extend_from_slice(&v[1..=dim]);
            vars.extend_from_slice(&v[dim + 1..]);
        }
        states.push(DiagGmm::new(dim, w, means, vars).map_err(|e| Error::parse(path, n, e.to_string()))?);
    }
    if let Some((n, _)) = lines.next() {
        return Err(Error::parse(path, n + 1, "trailing content"));
    }
    Ok(GmmAcousticModel::new(phones, topology, states)?)
}

pub fn write_gmm(model: &GmmAcousticModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, gmm_to_string(model)).map_err(Error::io(path))
}

pub fn read_gmm(path: impl AsRef<Path>) -> Result<GmmAcousticModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    gmm_from_str(&text, path)
}
