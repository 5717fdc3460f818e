//! Core algorithms for training distant-talking acoustic models on
//! contaminated speech.
//!
//! Everything here is pure computation over in-memory buffers: sweep
//! generation and impulse-response estimation, contamination
//! (`y = x * h + alpha * n`), the 45-dimensional acoustic frontend with
//! context splicing, a monophone GMM-HMM aligner, the sigmoid/softmax
//! acoustic network with its accuracy-driven learning-rate schedule, and
//! phone-loop decoding with PER scoring. File formats, the CLI and the
//! experiment drivers that touch the filesystem live in the `revkit` crate.
//!
//! The crate builds without `std` (with `alloc`) when the default `std`
//! feature is disabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod contaminate;
pub mod decode;
pub mod error;
pub mod experiment;
pub mod features;
pub mod fft;
pub mod hmm;
pub mod ir;
pub mod linalg;
pub mod nnet;
pub mod rng;
pub mod score;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use signal::Waveform;

/// Canonical sample rate of every waveform the pipeline accepts.
pub const SAMPLE_RATE: u32 = 16_000;

pub(crate) mod prelude {
    pub use alloc::boxed::Box;
    pub use alloc::format;
    pub use alloc::string::{String, ToString};
    pub use alloc::vec;
    pub use alloc::vec::Vec;
    // Float math (exp, ln, sin, ...) comes from the inherent methods with
    // `std` and from `libm` through this trait without it.
    #[allow(unused_imports)]
    pub use num_traits::Float;
}
