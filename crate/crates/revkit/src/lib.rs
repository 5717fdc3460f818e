//! File formats, corpus tooling and the `revkit` command line on top of
//! `revkit-core`.
//!
//! * [`wav`]: mono 16 kHz WAV, PCM16 or float32.
//! * [`manifest`]: tab-separated corpus manifests and phone inventories.
//! * [`archive`]: the `RVK1` binary matrix format for features, labels and
//!   normalization stats.
//! * [`ir_io`], [`model_io`]: impulse responses, GMM aligners and networks.
//! * [`config`]: flat `key = value` experiment configuration.
//! * [`corpus`], [`feats`], [`report`]: corpus-level operations.
//! * [`cli`]: the subcommands of the `revkit` binary.

pub mod archive;
pub mod cli;
pub mod config;
pub mod corpus;
mod error;
pub mod feats;
pub mod ir_io;
pub mod manifest;
pub mod model_io;
pub mod report;
pub mod wav;

pub use error::{Error, Result};
pub use revkit_core as core;
