//! Impulse responses as float32 WAV plus a sidecar text file holding the
//! direct-path index.

use std::fs;
use std::path::{Path, PathBuf};

use revkit_core::ir::ImpulseResponse;
use revkit_core::Waveform;

use crate::wav::{read_wav, write_wav, Encoding};
use crate::{Error, Result};

/// `room.wav` -> `room.wav.direct`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".direct");
    PathBuf::from(name)
}

/// Taps are stored as float32; the sidecar carries `direct_path_index=N`.
pub fn write_ir(ir: &ImpulseResponse, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let w = Waveform::from_f64(ir.taps(), ir.sample_rate())?;
    write_wav(&w, path, Encoding::Float32)?;
    let side = sidecar_path(path);
    fs::write(&side, format!("direct_path_index={}\n", ir.direct_path_index())).map_err(Error::io(&side))
}

/// Without a sidecar the direct path is taken to be the largest tap.
pub fn read_ir(path: impl AsRef<Path>) -> Result<ImpulseResponse> {
    let path = path.as_ref();
    let w = read_wav(path)?;
    let taps = w.to_f64();
    let side = sidecar_path(path);
    if !side.exists() {
        return Ok(ImpulseResponse::new(taps, w.sample_rate())?);
    }
    let text = fs::read_to_string(&side).map_err(Error::io(&side))?;
    let index = text
        .trim()
        .strip_prefix("direct_path_index=")
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::format(&side, "expected direct_path_index=N"))?;
    Ok(ImpulseResponse::with_direct_path(taps, w.sample_rate(), index)?)
}
