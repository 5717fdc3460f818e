use rand::seq::SliceRandom;

use super::{Dense, FrameSet, MlpModel};
use crate::linalg::Real;
use crate::prelude::*;
use crate::{rng, Error, Result};

pub const DEFAULT_LR: f64 = 0.008;
/// Initial learning rate when fine-tuning an inherited close-talk network.
pub const CT_FINE_TUNE_LR: f64 = 0.005;

/// SGD hyper-parameters and the accuracy-driven learning-rate rule.
/// Thresholds are in percentage points of dev frame accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSchedule {
    pub initial_lr: f64,
    pub keep_threshold: f64,
    pub stop_threshold: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub momentum: f64,
    /// Apply the learning rate to the gradient summed over the minibatch
    /// rather than its mean, so the rate is per frame and does not depend on
    /// the minibatch size.
    pub summed_gradient: bool,
    pub seed: u64,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            initial_lr: DEFAULT_LR,
            keep_threshold: 0.5,
            stop_threshold: 0.1,
            max_epochs: 20,
            batch_size: 256,
            momentum: 0.0,
            summed_gradient: true,
            seed: 0,
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_lr > 0.0) || !self.initial_lr.is_finite() {
            return Err(Error::InvalidParameter("initial learning rate must be positive".into()));
        }
        if !(self.stop_threshold < self.keep_threshold) {
            return Err(Error::InvalidParameter("stop threshold must be below keep threshold".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("minibatch size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidParameter("momentum must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// What to do after an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    /// Run another epoch with this learning rate.
    Continue { lr: f64 },
    Stop,
}

/// Learning-rate state machine. The rate is kept while each epoch improves
/// dev accuracy by more than `keep_threshold` over the previous epoch; from
/// the first smaller improvement on it is halved every epoch, and training
/// stops once an improvement falls below `stop_threshold` in that phase.
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    lr: f64,
    keep_threshold: f64,
    stop_threshold: f64,
    halving: bool,
    previous: f64,
}

impl LrSchedule {
    pub fn new(schedule: &TrainSchedule, initial_accuracy: f64) -> Self {
        Self {
            lr: schedule.initial_lr,
            keep_threshold: schedule.keep_threshold,
            stop_threshold: schedule.stop_threshold,
            halving: false,
            previous: initial_accuracy,
        }
    }

    /// Learning rate for the next epoch.
    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn is_halving(&self) -> bool {
        self.halving
    }

    /// Feeds the dev accuracy (%) reached by the epoch just finished.
    pub fn observe(&mut self, accuracy: f64) -> Decision {
        let increment = accuracy - self.previous;
        self.previous = accuracy;
        if self.halving && increment < self.stop_threshold {
            return Decision::Stop;
        }
        if !self.halving && increment <= self.keep_threshold {
            self.halving = true;
        }
        if self.halving {
            self.lr *= 0.5;
        }
        Decision::Continue { lr: self.lr }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub learning_rate: f64,
    pub train_cross_entropy: f64,
    pub dev_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub initial_dev_accuracy: f64,
    pub records: Vec<EpochRecord>,
    /// Epoch that triggered the stop rule, or the number of epochs run when
    /// the epoch limit came first.
    pub epochs_to_converge: usize,
    pub converged: bool,
    /// Epoch whose parameters were returned (0 = the initial model).
    pub best_epoch: usize,
}

impl TrainHistory {
    pub fn best_dev_accuracy(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.dev_accuracy)
            .fold(self.initial_dev_accuracy, f64::max)
    }

    pub fn learning_rates(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.learning_rate).collect()
    }
}

fn momentum_step<T: Real>(model: &mut MlpModel<T>, velocity: &mut [Dense<T>], grads: &[Dense<T>], lr: T, mu: T) {
    for ((layer, v), g) in model.layers_mut().iter_mut().zip(velocity.iter_mut()).zip(grads) {
        for ((w, vv), &d) in layer.weights_mut().iter_mut().zip(v.weights_mut()).zip(g.weights()) {
            *vv = mu * *vv - lr * d;
            *w += *vv;
        }
        for ((b, vv), &d) in layer.bias_mut().iter_mut().zip(v.bias_mut()).zip(g.bias()) {
            *vv = mu * *vv - lr * d;
            *b += *vv;
        }
    }
}

/// Minibatch cross-entropy SGD under the learning-rate schedule. Class
/// priors are re-estimated from the training labels; the parameters with the
/// best dev accuracy are returned.
pub fn train<T: Real>(
    model: &MlpModel<T>,
    train_set: &FrameSet,
    dev_set: &FrameSet,
    schedule: &TrainSchedule,
) -> Result<(MlpModel<T>, TrainHistory)> {
    schedule.validate()?;
    train_set.check_model(model)?;
    dev_set.check_model(model)?;
    if dev_set.is_empty() {
        return Err(Error::EmptyInput("dev set"));
    }
    let initial = dev_set.accuracy(model)?;
    let mut history = TrainHistory {
        initial_dev_accuracy: initial,
        records: Vec::new(),
        epochs_to_converge: 0,
        converged: false,
        best_epoch: 0,
    };
    if schedule.max_epochs == 0 {
        return Ok((model.clone(), history));
    }
    if train_set.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }

    let mut current = model.clone();
    current.set_priors_from_labels(train_set.labels())?;
    let mut best = (initial, current.clone());
    let mut control = LrSchedule::new(schedule, initial);
    let mut velocity: Vec<Dense<T>> = Vec::new();
    let mu = T::from_f64(schedule.momentum);
    if schedule.momentum > 0.0 {
        velocity = current
            .layers()
            .iter()
            .map(|l| Dense::new(l.inputs(), l.outputs(), vec![T::zero(); l.weights().len()], vec![T::zero(); l.outputs()]))
            .collect::<Result<_>>()?;
    }

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for epoch in 1..=schedule.max_epochs {
        let lr = control.lr();
        let mut r = rng::seeded(rng::derive_seed(schedule.seed, &format!("epoch-{epoch}")));
        order.sort_unstable();
        order.shuffle(&mut r);
        let mut ce_sum = 0.0;
        for batch in order.chunks(schedule.batch_size) {
            train_set.gather(batch, &mut x, &mut labels);
            let (loss, grads) = current.gradient(&x, &labels)?;
            let step = if schedule.summed_gradient { lr * batch.len() as f64 } else { lr };
            let lr_t = T::from_f64(step);
            if schedule.momentum > 0.0 {
                momentum_step(&mut current, &mut velocity, &grads, lr_t, mu);
            } else {
                current.apply_gradient(&grads, lr_t);
            }
            ce_sum += loss * batch.len() as f64;
        }
        if current.layers().iter().any(|l| l.weights().iter().any(|w| !w.is_finite())) {
            return Err(Error::InvalidParameter(format!("training diverged in epoch {epoch}")));
        }
        let accuracy = dev_set.accuracy(&current)?;
        history.records.push(EpochRecord {
            epoch,
            learning_rate: lr,
            train_cross_entropy: ce_sum / train_set.len() as f64,
            dev_accuracy: accuracy,
        });
        if accuracy > best.0 {
            best = (accuracy, current.clone());
            history.best_epoch = epoch;
        }
        history.epochs_to_converge = epoch;
        if control.observe(accuracy) == Decision::Stop {
            history.converged = true;
            break;
        }
    }
    let mut out = best.1;
    // The initial model can win when no epoch improves; it still carries
    // priors from the training labels.
    out.set_priors_from_labels(train_set.labels())?;
    Ok((out, history))
}

/// Fine-tunes an inherited close-talk network on distant data, starting from
/// `fine_tune_lr`.
pub fn ct_pretrain_transfer<T: Real>(
    ct_model: &MlpModel<T>,
    train_set: &FrameSet,
    dev_set: &FrameSet,
    fine_tune_lr: f64,
    schedule: &TrainSchedule,
) -> Result<(MlpModel<T>, TrainHistory)> {
    train_set.check_model(ct_model)?;
    let schedule = TrainSchedule {
        initial_lr: fine_tune_lr,
        ..*schedule
    };
    train(ct_model, train_set, dev_set, &schedule)
}
