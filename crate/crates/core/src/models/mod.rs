//! Forecaster architectures, the training loop, and checkpoints.
//!
//! The main model encodes each window with one ConvLSTM layer, flattens the
//! channel maps per timestep, runs a 10-layer stacked LSTM with a decaying
//! dropout schedule, and maps the last hidden state through a dense layer
//! and a sigmoid. Baselines swap the recurrent stack (plain RNN, pure LSTM,
//! all-ConvLSTM) or replace the network with boosted regression trees.

pub mod boosting;

pub use boosting::{fit_gbrt, GbrtModel, GbrtParams};

use crate::container::{bytes_to_f32s, f32s_to_bytes, read_container, write_container};
use crate::error::{CoreError, Result};
use crate::nn::convlstm::{ConvLstmCache, ConvLstmCell};
use crate::nn::lstm::{LstmCache, LstmLayer};
use crate::nn::optim::{RmsProp, RmsPropConfig};
use crate::nn::rnn::{RnnCache, RnnLayer};
use crate::nn::{
    dropout_backward, dropout_forward, sigmoid, Dense, DropoutMode, ParamVisitor, Scalar, Tensor,
};
use crate::pipeline::{Split, WindowedDataset};
use crate::schema::N_FEATURES;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Ours,
    Rnn,
    Lstm,
    PConvLstm,
    Boosting,
}

impl std::str::FromStr for Variant {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ours" => Ok(Variant::Ours),
            "rnn" => Ok(Variant::Rnn),
            "lstm" => Ok(Variant::Lstm),
            "pconvlstm" => Ok(Variant::PConvLstm),
            "boosting" => Ok(Variant::Boosting),
            other => Err(CoreError::Config(format!("unknown model variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Variant::Ours => "ours",
            Variant::Rnn => "rnn",
            Variant::Lstm => "lstm",
            Variant::PConvLstm => "pconvlstm",
            Variant::Boosting => "boosting",
        };
        f.write_str(name)
    }
}

fn default_dropout_schedule() -> Vec<f64> {
    vec![0.5, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.125]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ArchitectureConfig {
    pub variant: Variant,
    pub window: usize,
    pub n_features: usize,
    pub hidden: usize,
    pub conv_channels: usize,
    pub conv_kernel: usize,
    /// Number of recurrent layers in the stack.
    pub depth: usize,
    /// Dropout after each recurrent layer, one entry per layer.
    pub dropout_schedule: Vec<f64>,
    pub epochs: usize,
    pub batch_size: usize,
    /// Early-stop patience in stale validation epochs.
    pub patience: usize,
    pub seed: u64,
    pub optimizer: RmsPropConfig,
    pub boosting: GbrtParams,
}

impl Default for ArchitectureConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Ours,
            window: 2,
            n_features: N_FEATURES,
            hidden: 32,
            conv_channels: 8,
            conv_kernel: 3,
            depth: 10,
            dropout_schedule: default_dropout_schedule(),
            epochs: 50,
            batch_size: 2,
            patience: 10,
            seed: 0,
            optimizer: RmsPropConfig::default(),
            boosting: GbrtParams::default(),
        }
    }
}

impl ArchitectureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.n_features == 0 {
            return Err(CoreError::Config("window and feature width must be positive".into()));
        }
        if self.variant != Variant::Boosting {
            if self.depth == 0 || self.hidden == 0 {
                return Err(CoreError::Config("depth and hidden size must be positive".into()));
            }
            if self.dropout_schedule.len() != self.depth {
                return Err(CoreError::Config(format!(
                    "dropout schedule has {} entries for depth {}",
                    self.dropout_schedule.len(),
                    self.depth
                )));
            }
            if self.conv_kernel % 2 == 0 {
                return Err(CoreError::Config("conv kernel must be odd".into()));
            }
            if self.batch_size == 0 || self.epochs == 0 {
                return Err(CoreError::Config("batch size and epochs must be positive".into()));
            }
        }
        Ok(())
    }
}

enum Recurrent<F> {
    Conv(ConvLstmCell<F>),
    Lstm(LstmLayer<F>),
    Rnn(RnnLayer<F>),
}

enum BlockCache<F> {
    Conv(ConvLstmCache<F>),
    Lstm(LstmCache<F>),
    Rnn(RnnCache<F>),
}

impl<F: Scalar> Recurrent<F> {
    fn forward_seq(&self, xs: &[Vec<F>]) -> (BlockCache<F>, Vec<Vec<F>>) {
        match self {
            Recurrent::Conv(cell) => {
                let cache = cell.forward_seq(xs);
                let h = cache.h.clone();
                (BlockCache::Conv(cache), h)
            }
            Recurrent::Lstm(layer) => {
                let cache = layer.forward_seq(xs);
                let h = cache.h.clone();
                (BlockCache::Lstm(cache), h)
            }
            Recurrent::Rnn(layer) => {
                let cache = layer.forward_seq(xs);
                let h = cache.h.clone();
                (BlockCache::Rnn(cache), h)
            }
        }
    }

    fn backward_seq(&mut self, cache: &BlockCache<F>, dh: &[Vec<F>]) -> Vec<Vec<F>> {
        match (self, cache) {
            (Recurrent::Conv(cell), BlockCache::Conv(c)) => cell.backward_seq(c, dh),
            (Recurrent::Lstm(layer), BlockCache::Lstm(c)) => layer.backward_seq(c, dh),
            (Recurrent::Rnn(layer), BlockCache::Rnn(c)) => layer.backward_seq(c, dh),
            _ => unreachable!("cache kind mismatch"),
        }
    }

    fn zero_grads(&mut self) {
        match self {
            Recurrent::Conv(c) => c.zero_grads(),
            Recurrent::Lstm(l) => l.zero_grads(),
            Recurrent::Rnn(r) => r.zero_grads(),
        }
    }

    fn visit_params(&mut self, prefix: &str, visitor: &mut impl ParamVisitor<F>) {
        let mut wrapped = |name: &str, p: &mut Tensor<F>, g: &mut Tensor<F>| {
            visitor.visit(&format!("{prefix}.{name}"), p, g);
        };
        match self {
            Recurrent::Conv(c) => c.visit_params(&mut wrapped),
            Recurrent::Lstm(l) => l.visit_params(&mut wrapped),
            Recurrent::Rnn(r) => r.visit_params(&mut wrapped),
        }
    }
}

/// A recurrent stack with per-layer dropout and a sigmoid dense head.
pub struct NeuralModel<F> {
    blocks: Vec<(Recurrent<F>, f64)>,
    head: Dense<F>,
    pub arch: ArchitectureConfig,
}

pub struct ForwardCache<F> {
    block_caches: Vec<BlockCache<F>>,
    dropout_masks: Vec<Vec<Vec<bool>>>,
    /// Block outputs after dropout, kept as the next block's input record.
    head_input: Vec<F>,
    pub prob: F,
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed ^ a.wrapping_mul(0x9E3779B97F4A7C15) ^ b.wrapping_mul(0xD1B54A32D192ED03);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x ^ (x >> 31)
}

impl<F: Scalar> NeuralModel<F> {
    /// Builds the variant's layer stack with seeded initialization.
    pub fn build(arch: &ArchitectureConfig) -> Result<Self> {
        arch.validate()?;
        if arch.variant == Variant::Boosting {
            return Err(CoreError::Config("boosting is not a neural model".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix(arch.seed, 0xB00C, 0x11));
        let feat = arch.n_features;
        let mut blocks: Vec<(Recurrent<F>, f64)> = Vec::new();
        let head_in;
        match arch.variant {
            Variant::Ours => {
                blocks.push((
                    Recurrent::Conv(ConvLstmCell::new(1, arch.conv_channels, feat, arch.conv_kernel, &mut rng)),
                    0.0,
                ));
                let flat = arch.conv_channels * feat;
                for layer in 0..arch.depth {
                    let in_dim = if layer == 0 { flat } else { arch.hidden };
                    blocks.push((
                        Recurrent::Lstm(LstmLayer::new(in_dim, arch.hidden, &mut rng)),
                        arch.dropout_schedule[layer],
                    ));
                }
                head_in = arch.hidden;
            }
            Variant::Lstm => {
                for layer in 0..arch.depth {
                    let in_dim = if layer == 0 { feat } else { arch.hidden };
                    blocks.push((
                        Recurrent::Lstm(LstmLayer::new(in_dim, arch.hidden, &mut rng)),
                        arch.dropout_schedule[layer],
                    ));
                }
                head_in = arch.hidden;
            }
            Variant::Rnn => {
                for layer in 0..arch.depth {
                    let in_dim = if layer == 0 { feat } else { arch.hidden };
                    blocks.push((
                        Recurrent::Rnn(RnnLayer::new(in_dim, arch.hidden, &mut rng)),
                        arch.dropout_schedule[layer],
                    ));
                }
                head_in = arch.hidden;
            }
            Variant::PConvLstm => {
                for layer in 0..arch.depth {
                    let in_ch = if layer == 0 { 1 } else { arch.conv_channels };
                    blocks.push((
                        Recurrent::Conv(ConvLstmCell::new(in_ch, arch.conv_channels, feat, arch.conv_kernel, &mut rng)),
                        arch.dropout_schedule[layer],
                    ));
                }
                head_in = arch.conv_channels * feat;
            }
            Variant::Boosting => unreachable!(),
        }
        let head = Dense::new(head_in, 1, &mut rng);
        Ok(Self { blocks, head, arch: arch.clone() })
    }

    /// Forward over one window. `sample` is the flattened `(window,
    /// n_features)` block; dropout masks derive from `dropout_seed` alone.
    pub fn forward(&self, sample: &[F], mode: DropoutMode, dropout_seed: u64) -> ForwardCache<F> {
        let w = self.arch.window;
        let feat = self.arch.n_features;
        debug_assert_eq!(sample.len(), w * feat, "window shape mismatch");
        let mut seq: Vec<Vec<F>> = (0..w).map(|t| sample[t * feat..(t + 1) * feat].to_vec()).collect();
        let mut block_caches = Vec::with_capacity(self.blocks.len());
        let mut dropout_masks = Vec::with_capacity(self.blocks.len());
        for (bi, (block, rate)) in self.blocks.iter().enumerate() {
            let (cache, mut out) = block.forward_seq(&seq);
            let mut masks = Vec::new();
            if *rate > 0.0 {
                for (t, frame) in out.iter_mut().enumerate() {
                    let (dropped, mask) =
                        dropout_forward(frame, *rate, mode, mix(dropout_seed, bi as u64, t as u64));
                    *frame = dropped;
                    masks.push(mask);
                }
            }
            block_caches.push(cache);
            dropout_masks.push(masks);
            seq = out;
        }
        let head_input = seq.last().expect("non-empty window").clone();
        let logit = self.head.forward(&head_input)[0];
        ForwardCache { block_caches, dropout_masks, head_input, prob: sigmoid(logit) }
    }

    /// Backward from the probability gradient; parameter gradients
    /// accumulate in the layers.
    pub fn backward(&mut self, cache: &ForwardCache<F>, dprob: F) {
        let p = cache.prob;
        let dlogit = dprob * p * (F::ONE - p);
        let dhead = self.head.backward(&cache.head_input, &[dlogit]);
        let steps = self.arch.window;
        let mut dseq: Vec<Vec<F>> = Vec::with_capacity(steps);
        {
            let top = cache
                .block_caches
                .last()
                .map(|c| block_h_len(c))
                .unwrap_or(dhead.len());
            for t in 0..steps {
                if t + 1 == steps {
                    dseq.push(dhead.clone());
                } else {
                    dseq.push(vec![F::ZERO; top]);
                }
            }
        }
        for (bi, (block, rate)) in self.blocks.iter_mut().enumerate().rev() {
            let masks = &cache.dropout_masks[bi];
            if *rate > 0.0 {
                for (t, frame) in dseq.iter_mut().enumerate() {
                    *frame = dropout_backward(frame, &masks[t], *rate);
                }
            }
            dseq = block.backward_seq(&cache.block_caches[bi], &dseq);
        }
    }

    pub fn zero_grads(&mut self) {
        for (block, _) in self.blocks.iter_mut() {
            block.zero_grads();
        }
        self.head.zero_grads();
    }

    pub fn visit_params(&mut self, visitor: &mut impl ParamVisitor<F>) {
        for (bi, (block, _)) in self.blocks.iter_mut().enumerate() {
            block.visit_params(&format!("block{bi}"), visitor);
        }
        let mut wrapped = |name: &str, p: &mut Tensor<F>, g: &mut Tensor<F>| {
            visitor.visit(&format!("head.{name}"), p, g);
        };
        self.head.visit_params(&mut wrapped);
    }

    pub fn n_params(&mut self) -> usize {
        let mut count = 0;
        self.visit_params(&mut |_: &str, p: &mut Tensor<F>, _: &mut Tensor<F>| {
            count += p.len();
        });
        count
    }

    fn export_params(&mut self) -> Vec<(String, Vec<usize>, Vec<F>)> {
        let mut out = Vec::new();
        self.visit_params(&mut |name: &str, p: &mut Tensor<F>, _: &mut Tensor<F>| {
            out.push((name.to_string(), p.shape().to_vec(), p.data().to_vec()));
        });
        out
    }

    fn import_params(&mut self, flat: &[F]) -> Result<()> {
        let mut offset = 0;
        let mut err = None;
        self.visit_params(&mut |name: &str, p: &mut Tensor<F>, _: &mut Tensor<F>| {
            if err.is_some() {
                return;
            }
            let len = p.len();
            if offset + len > flat.len() {
                err = Some(format!("parameter blob too short at {name}"));
                return;
            }
            p.data_mut().copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        });
        if let Some(e) = err {
            return Err(CoreError::Shape(e));
        }
        if offset != flat.len() {
            return Err(CoreError::Shape(format!(
                "parameter blob has {} values, model expects {offset}",
                flat.len()
            )));
        }
        Ok(())
    }
}

fn block_h_len<F: Scalar>(cache: &BlockCache<F>) -> usize {
    match cache {
        BlockCache::Conv(c) => c.h.last().map(|h| h.len()).unwrap_or(0),
        BlockCache::Lstm(c) => c.h.last().map(|h| h.len()).unwrap_or(0),
        BlockCache::Rnn(c) => c.h.last().map(|h| h.len()).unwrap_or(0),
    }
}

/// A trained model of any variant, ready for prediction.
pub enum TrainedModel {
    Neural(Box<NeuralModel<f32>>),
    Boosting(GbrtModel),
}

impl TrainedModel {
    pub fn arch(&self) -> Option<&ArchitectureConfig> {
        match self {
            TrainedModel::Neural(m) => Some(&m.arch),
            TrainedModel::Boosting(_) => None,
        }
    }

    /// Prediction for one flattened window; strictly inside (0, 1) for
    /// neural variants.
    pub fn predict_one(&self, sample: &[f32]) -> f64 {
        match self {
            TrainedModel::Neural(m) => {
                m.forward(sample, DropoutMode::Infer, 0).prob.to_f64()
            }
            TrainedModel::Boosting(m) => m.predict(sample),
        }
    }

    pub fn predict_indices(&self, dataset: &WindowedDataset, indices: &[usize]) -> Vec<f64> {
        indices.iter().map(|&i| self.predict_one(dataset.sample(i))).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainReport {
    pub trace: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Trains the configured variant on the dataset's train split, selecting
/// the checkpoint with the best validation loss and stopping early after
/// `patience` stale epochs. Mini-batch gradients average the squared error
/// over the batch; validation is always dropout-free.
pub fn train(dataset: &WindowedDataset, arch: &ArchitectureConfig) -> Result<(TrainedModel, TrainReport)> {
    arch.validate()?;
    if dataset.window != arch.window {
        return Err(CoreError::Config(format!(
            "dataset was windowed at {}, model expects {}",
            dataset.window, arch.window
        )));
    }
    let train_idx = dataset.indices_in(Split::Train);
    let val_idx = dataset.indices_in(Split::Val);
    if train_idx.is_empty() || val_idx.is_empty() {
        return Err(CoreError::Config("train and validation splits must be non-empty".into()));
    }

    if arch.variant == Variant::Boosting {
        let len = dataset.sample_len();
        let mut data = Vec::with_capacity(train_idx.len() * len);
        let mut labels = Vec::with_capacity(train_idx.len());
        for &i in &train_idx {
            data.extend_from_slice(dataset.sample(i));
            labels.push(dataset.labels[i]);
        }
        let model = fit_gbrt(&data, &labels, len, &arch.boosting)?;
        let trained = TrainedModel::Boosting(model);
        let val_loss = eval_loss(&trained, dataset, &val_idx);
        let train_loss = eval_loss(&trained, dataset, &train_idx);
        let report = TrainReport {
            trace: vec![EpochStats { epoch: 0, train_loss, val_loss }],
            best_epoch: 0,
            best_val_loss: val_loss,
        };
        return Ok((trained, report));
    }

    let mut model: NeuralModel<f32> = NeuralModel::build(arch)?;
    let mut optim: RmsProp<f32> = RmsProp::new(arch.optimizer);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(mix(arch.seed, 0x5487, 0x2));
    let mut order = train_idx.clone();

    let mut trace = Vec::new();
    let mut best: Option<(usize, f64, Vec<f32>)> = None;
    let mut stale = 0usize;
    let mut dropout_counter = 0u64;

    for epoch in 0..arch.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sq_sum = 0.0f64;
        for batch in order.chunks(arch.batch_size) {
            model.zero_grads();
            let inv = 1.0 / batch.len() as f64;
            for &i in batch {
                dropout_counter += 1;
                let cache = model.forward(
                    dataset.sample(i),
                    DropoutMode::Train,
                    mix(arch.seed, 0xD0, dropout_counter),
                );
                let err = cache.prob.to_f64() - f64::from(dataset.labels[i]);
                sq_sum += err * err;
                let dprob = (2.0 * err * inv) as f32;
                model.backward(&cache, dprob);
            }
            optim.step(|v| model.visit_params(v));
        }
        let train_loss = sq_sum / order.len() as f64;
        if !train_loss.is_finite() {
            return Err(CoreError::Numerical(format!(
                "training loss became non-finite at epoch {epoch}; learning rate {} with seed {} \
                 and uniform weight initialization",
                arch.optimizer.learning_rate, arch.seed
            )));
        }
        let val_loss = neural_eval_loss(&model, dataset, &val_idx);
        trace.push(EpochStats { epoch, train_loss, val_loss });
        let improved = best.as_ref().map_or(true, |(_, b, _)| val_loss < *b);
        if improved {
            let flat: Vec<f32> =
                model.export_params().into_iter().flat_map(|(_, _, v)| v).collect();
            best = Some((epoch, val_loss, flat));
            stale = 0;
        } else {
            stale += 1;
            if stale > arch.patience {
                break;
            }
        }
    }

    let (best_epoch, best_val_loss, params) = best.expect("at least one epoch ran");
    model.import_params(&params)?;
    let report = TrainReport { trace, best_epoch, best_val_loss };
    Ok((TrainedModel::Neural(Box::new(model)), report))
}

fn eval_loss(model: &TrainedModel, dataset: &WindowedDataset, indices: &[usize]) -> f64 {
    if indices.is_empty() {
        return f64::NAN;
    }
    let mut sum = 0.0;
    for &i in indices {
        let p = model.predict_one(dataset.sample(i));
        let e = p - f64::from(dataset.labels[i]);
        sum += e * e;
    }
    sum / indices.len() as f64
}

fn neural_eval_loss(model: &NeuralModel<f32>, dataset: &WindowedDataset, indices: &[usize]) -> f64 {
    if indices.is_empty() {
        return f64::NAN;
    }
    let mut sum = 0.0;
    for &i in indices {
        let p = model.forward(dataset.sample(i), DropoutMode::Infer, 0).prob.to_f64();
        let e = p - f64::from(dataset.labels[i]);
        sum += e * e;
    }
    sum / indices.len() as f64
}

/// Rolling prediction over one bond: the prior-probability column of each
/// window is refreshed with the model's own previous outputs (standardized
/// with the bond's recorded moments) instead of label-time values.
pub fn rolling_predict(
    model: &TrainedModel,
    standardized_rows: &[f32],
    n_days: usize,
    prior_mean: f64,
    prior_std: f64,
    prior_init: f64,
) -> Result<Vec<f64>> {
    let arch = model
        .arch()
        .ok_or_else(|| CoreError::Config("rolling prediction needs a neural checkpoint".into()))?;
    let w = arch.window;
    let feat = arch.n_features;
    if standardized_rows.len() != n_days * feat {
        return Err(CoreError::Shape(format!(
            "{} values for {n_days} days of width {feat}",
            standardized_rows.len()
        )));
    }
    if n_days <= w {
        return Ok(Vec::new());
    }
    let prior_col = crate::schema::COL_PRIOR_DEFAULT_PROB;
    let mut raw_prior: Vec<f64> = vec![prior_init; n_days];
    let mut out = Vec::with_capacity(n_days - w);
    let mut window_buf = vec![0.0f32; w * feat];
    for end in w - 1..n_days - 1 {
        for (row, day) in (end + 1 - w..=end).enumerate() {
            let src = &standardized_rows[day * feat..(day + 1) * feat];
            let dst = &mut window_buf[row * feat..(row + 1) * feat];
            dst.copy_from_slice(src);
            // Live prior chain: predictions exist for days > w - 1.
            if day >= w {
                dst[prior_col] = ((raw_prior[day] - prior_mean) / prior_std) as f32;
            }
        }
        let p = model.predict_one(&window_buf);
        raw_prior[end + 1] = p;
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub arch: ArchitectureConfig,
    pub registry_hash: String,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub param_shapes: Vec<(String, Vec<usize>)>,
    /// Boosted-tree models live entirely in the header.
    pub boosting_model: Option<GbrtModel>,
}

pub fn save_checkpoint(
    path: &Path,
    model: &mut TrainedModel,
    report: &TrainReport,
    registry_hash: &str,
) -> Result<()> {
    match model {
        TrainedModel::Neural(m) => {
            let params = m.export_params();
            let header = CheckpointHeader {
                arch: m.arch.clone(),
                registry_hash: registry_hash.to_string(),
                best_epoch: report.best_epoch,
                best_val_loss: report.best_val_loss,
                param_shapes: params.iter().map(|(n, s, _)| (n.clone(), s.clone())).collect(),
                boosting_model: None,
            };
            let flat: Vec<f32> = params.into_iter().flat_map(|(_, _, v)| v).collect();
            write_container(path, &header, &f32s_to_bytes(&flat))
        }
        TrainedModel::Boosting(m) => {
            let header = CheckpointHeader {
                arch: ArchitectureConfig {
                    variant: Variant::Boosting,
                    ..ArchitectureConfig::default()
                },
                registry_hash: registry_hash.to_string(),
                best_epoch: report.best_epoch,
                best_val_loss: report.best_val_loss,
                param_shapes: Vec::new(),
                boosting_model: Some(m.clone()),
            };
            write_container(path, &header, &[])
        }
    }
}

pub fn load_checkpoint(path: &Path) -> Result<(TrainedModel, CheckpointHeader)> {
    let (header, blob): (CheckpointHeader, Vec<u8>) = read_container(path)?;
    if let Some(gbrt) = &header.boosting_model {
        return Ok((TrainedModel::Boosting(gbrt.clone()), header));
    }
    let mut model: NeuralModel<f32> = NeuralModel::build(&header.arch)?;
    let flat = bytes_to_f32s(&blob)?;
    model.import_params(&flat)?;
    Ok((TrainedModel::Neural(Box::new(model)), header))
}
