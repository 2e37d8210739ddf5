//! Training harness: dataset splitting, decoupled-weight-decay adaptive
//! moments, the halving learning-rate schedule, early stopping with
//! best-weight reload, and the checkpoint format.

pub mod adamw;
pub mod checkpoint;
pub mod split;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use physloss::{LossReport, PhysicsLoss};
use pino::{Gradients, OperatorModel};
use sensors::SensorSample;

pub use adamw::AdamW;
pub use checkpoint::{load_checkpoint, load_checkpoint_full, save_checkpoint};
pub use split::{split_dataset, SplitIndices};

pub type Result<T> = std::result::Result<T, TrainError>;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite loss at epoch {epoch}, sample {sample}: {report:?}")]
    NonFiniteLoss {
        epoch: usize,
        sample: usize,
        report: Box<EpochStats>,
    },
    #[error(transparent)]
    Loss(#[from] physloss::LossError),
    #[error(transparent)]
    Pino(#[from] pino::PinoError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Optimization hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Initial learning rate.
    pub lr0: f64,
    /// Halve the learning rate every this many epochs.
    pub halve_every: usize,
    pub batch_size: usize,
    /// Early stopping: epochs without validation improvement.
    pub patience: usize,
    pub max_epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
    /// Zero out wall-clock fields so reruns are bit-identical.
    pub deterministic: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr0: 1e-3,
            halve_every: 25,
            batch_size: 8,
            patience: 50,
            max_epochs: 300,
            weight_decay: 1e-4,
            seed: 0,
            deterministic: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lr0 <= 0.0
            || self.halve_every == 0
            || self.batch_size == 0
            || self.patience == 0
            || self.max_epochs == 0
            || self.weight_decay < 0.0
        {
            return Err(TrainError::InvalidArgument(
                "training hyperparameters must be positive".into(),
            ));
        }
        if self.patience > self.max_epochs {
            return Err(TrainError::InvalidArgument(
                "patience must not exceed max_epochs".into(),
            ));
        }
        Ok(())
    }

    /// Learning rate in force during `epoch` (0-based).
    pub fn lr_at_epoch(&self, epoch: usize) -> f64 {
        self.lr0 * 0.5_f64.powi((epoch / self.halve_every) as i32)
    }
}

/// Mean loss components over a set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct EpochStats {
    pub sensor: f64,
    pub phy1: f64,
    pub phy2: f64,
    pub reg: f64,
    pub total: f64,
}

impl EpochStats {
    fn accumulate(&mut self, r: &LossReport) {
        self.sensor += r.sensor;
        self.phy1 += r.phy1;
        self.phy2 += r.phy2;
        self.reg += r.reg;
        self.total += r.total;
    }

    fn scale(&mut self, inv: f64) {
        self.sensor *= inv;
        self.phy1 *= inv;
        self.phy2 *= inv;
        self.reg *= inv;
        self.total *= inv;
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train: EpochStats,
    pub val: EpochStats,
    /// Zero in deterministic mode.
    pub wall_ms: u64,
}

/// Per-epoch aggregates of one run; `best_epoch` attains the minimum
/// validation total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunRecord {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_total: f64,
    pub stopped_early: bool,
}

impl RunRecord {
    /// Line-delimited structured log: one JSON object per epoch plus a
    /// final summary line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.epochs {
            out.push_str(&serde_json::to_string(e).expect("epoch record"));
            out.push('\n');
        }
        out.push_str(
            &serde_json::json!({
                "best_epoch": self.best_epoch,
                "best_val_total": self.best_val_total,
                "stopped_early": self.stopped_early,
            })
            .to_string(),
        );
        out.push('\n');
        out
    }
}

fn mean_loss(
    loss: &PhysicsLoss,
    model: &OperatorModel,
    set: &[SensorSample],
) -> Result<EpochStats> {
    let reports: Vec<physloss::Result<LossReport>> = set
        .par_iter()
        .map(|s| loss.total_loss(model, s).map(|(r, _)| r))
        .collect();
    let mut stats = EpochStats::default();
    for r in reports {
        stats.accumulate(&r?);
    }
    stats.scale(1.0 / set.len() as f64);
    Ok(stats)
}

/// Train with decoupled-weight-decay Adam, halving schedule and early
/// stopping; returns the best-validation weights and the run record.
///
/// Batch gradients are the mean of per-sample gradients, accumulated in
/// sample order (identical with and without parallel evaluation).
pub fn train(
    mut model: OperatorModel,
    train_set: &[SensorSample],
    val_set: &[SensorSample],
    loss: &PhysicsLoss,
    cfg: &TrainConfig,
) -> Result<(OperatorModel, RunRecord)> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(TrainError::InvalidArgument(
            "training and validation sets must be non-empty".into(),
        ));
    }
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;

    let mut optimizer = AdamW::new(&model, cfg.weight_decay);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut record = RunRecord::default();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_params = model.clone();
    let mut since_best = 0usize;

    for epoch in 0..cfg.max_epochs {
        let started = std::time::Instant::now();
        let lr = cfg.lr_at_epoch(epoch);
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut rng);

        let mut train_stats = EpochStats::default();
        for batch in order.chunks(cfg.batch_size) {
            let results: Vec<physloss::Result<(LossReport, Gradients)>> = batch
                .par_iter()
                .map(|&i| {
                    loss.total_loss_with_grad(&model, &train_set[i])
                        .map(|(r, g, _)| (r, g))
                })
                .collect();
            let mut mean_grads: Option<Gradients> = None;
            let inv = 1.0 / batch.len() as f64;
            for (bi, res) in results.into_iter().enumerate() {
                let (report, grads) = res?;
                if !report.total.is_finite() {
                    let mut stats = EpochStats::default();
                    stats.accumulate(&report);
                    return Err(TrainError::NonFiniteLoss {
                        epoch,
                        sample: batch[bi],
                        report: Box::new(stats),
                    });
                }
                train_stats.accumulate(&report);
                match mean_grads.as_mut() {
                    None => {
                        let mut g = grads;
                        g.scale(inv);
                        mean_grads = Some(g);
                    }
                    Some(acc) => acc.axpy(inv, &grads),
                }
            }
            optimizer.step(&mut model, &mean_grads.expect("non-empty batch"), lr);
        }
        train_stats.scale(1.0 / train_set.len() as f64);

        let val_stats = mean_loss(loss, &model, val_set)?;
        if !val_stats.is_finite() {
            return Err(TrainError::NonFiniteLoss {
                epoch,
                sample: usize::MAX,
                report: Box::new(val_stats),
            });
        }

        if val_stats.total < best_val {
            best_val = val_stats.total;
            best_epoch = epoch;
            best_params = model.clone();
            since_best = 0;
        } else {
            since_best += 1;
        }

        record.epochs.push(EpochRecord {
            epoch,
            lr,
            train: train_stats,
            val: val_stats,
            wall_ms: if cfg.deterministic {
                0
            } else {
                started.elapsed().as_millis() as u64
            },
        });

        if since_best >= cfg.patience {
            record.stopped_early = true;
            break;
        }
    }

    record.best_epoch = best_epoch;
    record.best_val_total = best_val;
    Ok((best_params, record))
}
