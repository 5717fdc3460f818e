use crate::prelude::*;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("sample rate mismatch: {expected} Hz vs {got} Hz")]
    SampleRateMismatch { expected: u32, got: u32 },
    #[error("recording shorter than sweep ({recording} < {sweep} samples)")]
    RecordingTooShort { recording: usize, sweep: usize },
    #[error("silent recording")]
    SilentRecording,
    #[error("insufficient decay range")]
    InsufficientDecay,
    #[error("zero-power noise")]
    ZeroPowerNoise,
    #[error("zero-power signal")]
    ZeroPowerSignal,
    #[error("waveform shorter than one frame ({len} < {frame_len} samples)")]
    ShorterThanFrame { len: usize, frame_len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("utterance too short for transcript ({frames} frames for {states} states)")]
    TooShortForTranscript { frames: usize, states: usize },
    #[error("time base mismatch: clean alignment has {clean} frames, distant features {distant}")]
    TimeBaseMismatch { clean: usize, distant: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: u32, classes: usize },
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("too short for one phone ({0} frames)")]
    TooShortForPhone(usize),
    #[error("empty reference")]
    EmptyReference,
    #[error("zero prior for class {0}")]
    ZeroPrior(usize),
    #[error("unknown phone symbol {0:?}")]
    UnknownPhone(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("utterance {id}: {source}")]
    Utterance { id: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn in_utterance(self, id: &str) -> Self {
        Error::Utterance {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
