use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::checkpoint::{Checkpoint, TrainingMeta};
use super::model::{ArchDescriptor, Batch, Model};
use super::tensor::Tensor;
use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_csv};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub validation_fraction: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 256,
            max_epochs: 500,
            validation_fraction: 0.05,
            patience: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Config("batch_size, max_epochs and patience must be positive".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config(format!(
                "validation_fraction {} must lie in (0, 1)",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean minibatch loss seen during the epoch.
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation loss.
    pub checkpoint: Checkpoint,
    pub log: Vec<EpochRecord>,
}

/// Writes `epoch,train_loss,val_loss` rows.
pub fn write_training_log(path: &Path, log: &[EpochRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = log
        .iter()
        .map(|r| vec![r.epoch.to_string(), fmt_f64(r.train_loss), fmt_f64(r.val_loss)])
        .collect();
    write_csv(path, &["epoch", "train_loss", "val_loss"], &rows)
}

/// Stream ids under the training seed.
const INIT_STREAM: u64 = 0;
const SPLIT_STREAM: u64 = 1;
const EPOCH_STREAM_BASE: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gather(ds: &Dataset, idx: &[usize], inputs: &mut Vec<f64>, targets: &mut Vec<f64>) {
    inputs.clear();
    targets.clear();
    for &i in idx {
        inputs.extend_from_slice(&ds.samples[i].inputs);
        targets.extend_from_slice(&ds.samples[i].targets);
    }
}

/// Mean MSE over the samples `idx`, evaluated in fixed-size chunks.
fn subset_loss(model: &Model, ds: &Dataset, idx: &[usize]) -> Result<f64> {
    let (mut inputs, mut targets) = (Vec::new(), Vec::new());
    let mut total = 0.0;
    for chunk in idx.chunks(1024) {
        gather(ds, chunk, &mut inputs, &mut targets);
        total += model.loss(&Batch { inputs: &inputs, targets: &targets, len: chunk.len() })? * chunk.len() as f64;
    }
    Ok(total / idx.len() as f64)
}

pub fn train(ds: &Dataset, arch: &ArchDescriptor, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with(ds, arch, cfg, |_| {})
}

/// [`train`] with a callback after every epoch.
pub fn train_with(
    ds: &Dataset,
    arch: &ArchDescriptor,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    ds.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let architecture = arch.resolve(&ds.header)?;
    let init_seed = {
        use rand::RngCore;
        stream_rng(cfg.seed, INIT_STREAM).next_u64()
    };
    let mut model = Model::init(&architecture, init_seed)?;

    let n = ds.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(cfg.seed, SPLIT_STREAM));
    let n_val = ((cfg.validation_fraction * n as f64).round() as usize).min(n - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    // With too few samples to hold any out, the training set doubles as the
    // validation set.
    let val_idx: Vec<usize> = if val_idx.is_empty() { train_idx.to_vec() } else { val_idx.to_vec() };
    let mut train_idx = train_idx.to_vec();

    let adam_cfg = AdamConfig { learning_rate: cfg.learning_rate, ..AdamConfig::default() };
    let mut adam = AdamState::new(adam_cfg, &model.parameters());
    let mut best: Option<(f64, usize, Vec<Tensor>)> = None;
    let mut best_train = f64::NAN;
    let mut since_best = 0;
    let mut log = Vec::new();
    let (mut inputs, mut targets) = (Vec::new(), Vec::new());

    for epoch in 1..=cfg.max_epochs {
        train_idx.shuffle(&mut stream_rng(cfg.seed, EPOCH_STREAM_BASE + epoch as u64));
        let mut total = 0.0;
        for chunk in train_idx.chunks(cfg.batch_size) {
            gather(ds, chunk, &mut inputs, &mut targets);
            let (grads, loss) = model.backward(&Batch { inputs: &inputs, targets: &targets, len: chunk.len() })?;
            if !loss.is_finite() {
                return Err(Error::Diverged(epoch));
            }
            total += loss * chunk.len() as f64;
            adam.update(&mut model.parameters_mut(), &grads)?;
        }
        let train_loss = total / train_idx.len() as f64;
        let val_loss = subset_loss(&model, ds, &val_idx)?;
        if !val_loss.is_finite() {
            return Err(Error::Diverged(epoch));
        }
        let record = EpochRecord { epoch, train_loss, val_loss };
        on_epoch(&record);
        log.push(record);
        if best.as_ref().is_none_or(|(b, _, _)| val_loss < *b) {
            best = Some((val_loss, epoch, model.parameters().into_iter().cloned().collect()));
            best_train = train_loss;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }

    let (best_val, best_epoch, params) = best.expect("at least one epoch runs");
    let model = Model::from_parameters(&architecture, params)?;
    let meta = TrainingMeta {
        seed: cfg.seed,
        epochs_run: log.len(),
        best_epoch,
        final_train_loss: best_train,
        final_val_loss: best_val,
        config: cfg.clone(),
    };
    Ok(TrainOutcome { checkpoint: Checkpoint::new(&model, &ds.header, Some(meta)), log })
}
