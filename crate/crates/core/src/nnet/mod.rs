//! Sigmoid/softmax acoustic network, cross-entropy SGD with the
//! accuracy-driven learning-rate schedule, and layer-wise pre-training.

mod data;
mod model;
mod rbm;
mod schedule;

pub use data::FrameSet;
pub use model::{frame_accuracy, Dense, Layout, MlpModel};
pub use rbm::{rbm_pretrain, RbmConfig, RbmReport};
pub use schedule::{
    ct_pretrain_transfer, train, Decision, EpochRecord, LrSchedule, TrainHistory, TrainSchedule, CT_FINE_TUNE_LR,
    DEFAULT_LR,
};
