//! Siamese sensorimotor predictor.
//!
//! One encoder maps motor states to representations; it is applied to both
//! `m_t` and `m_{t+1}` with the same parameters. The predictor receives
//! `(h_t, h_{t+1}, s_t)` and outputs `s̃_{t+1}`. The only training signal is
//! the squared prediction error; nothing constrains `h` directly.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, EvalGrid};
use crate::error::{Error, Result};
use crate::exploration::{Batch, Dataset, DEFAULT_BATCH_SIZE};
use crate::nn::checkpoint::NetworkCheckpoint;
use crate::nn::{mse_loss, Activation, AdamState, LinearDecay, Matrix, Mlp, MlpGrads};
use crate::rng::{Rng, Stream};

pub const ENCODER_HIDDEN: [usize; 3] = [150, 100, 50];
pub const PREDICTOR_HIDDEN: [usize; 3] = [200, 150, 100];
pub const DEFAULT_DIM_H: usize = 3;
pub const TRAINING_CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveModel {
    pub encoder: Mlp,
    pub predictor: Mlp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub encoder: MlpGrads,
    pub predictor: MlpGrads,
}

impl PredictiveModel {
    /// Encoder `N_m → 150 → 100 → 50 → dim_h`, predictor
    /// `2·dim_h + N_s → 200 → 150 → 100 → N_s`.
    pub fn new(n_m: usize, n_s: usize, dim_h: usize, hidden: Activation, rng: &mut Rng) -> Result<Self> {
        Self::with_hidden(n_m, n_s, dim_h, &ENCODER_HIDDEN, &PREDICTOR_HIDDEN, hidden, rng)
    }

    pub fn with_hidden(
        n_m: usize,
        n_s: usize,
        dim_h: usize,
        encoder_hidden: &[usize],
        predictor_hidden: &[usize],
        hidden: Activation,
        rng: &mut Rng,
    ) -> Result<Self> {
        if n_m == 0 || n_s == 0 || dim_h == 0 {
            return Err(Error::Config(format!(
                "model dimensions must be ≥ 1 (N_m={n_m}, N_s={n_s}, dim_H={dim_h})"
            )));
        }
        let enc: Vec<usize> = std::iter::once(n_m).chain(encoder_hidden.iter().copied()).chain([dim_h]).collect();
        let pred: Vec<usize> = std::iter::once(2 * dim_h + n_s)
            .chain(predictor_hidden.iter().copied())
            .chain([n_s])
            .collect();
        let encoder = Mlp::new(&enc, hidden, rng)?;
        let predictor = Mlp::new(&pred, hidden, rng)?;
        Ok(Self { encoder, predictor })
    }

    pub fn from_parts(encoder: Mlp, predictor: Mlp) -> Result<Self> {
        let dim_h = encoder.out_dim();
        let n_s = predictor.out_dim();
        if predictor.in_dim() != 2 * dim_h + n_s {
            return Err(Error::Shape(format!(
                "predictor expects {} inputs but encoder width {dim_h} and {n_s} sensors need {}",
                predictor.in_dim(),
                2 * dim_h + n_s
            )));
        }
        Ok(Self { encoder, predictor })
    }

    pub fn dim_h(&self) -> usize {
        self.encoder.out_dim()
    }

    pub fn motor_dim(&self) -> usize {
        self.encoder.in_dim()
    }

    pub fn sensory_dim(&self) -> usize {
        self.predictor.out_dim()
    }

    pub fn encode(&self, m: &Matrix) -> Result<Matrix> {
        self.encoder.infer(m)
    }

    fn check_batch(&self, m_t: &Matrix, s_t: &Matrix, m_next: &Matrix) -> Result<()> {
        let b = m_t.rows();
        if m_next.rows() != b || s_t.rows() != b {
            return Err(Error::Shape("m_t, s_t and m_next must have equally many rows".into()));
        }
        if s_t.cols() != self.sensory_dim() {
            return Err(Error::Shape(format!(
                "model expects {} sensory columns, got {}",
                self.sensory_dim(),
                s_t.cols()
            )));
        }
        Ok(())
    }

    pub fn predict(&self, m_t: &Matrix, s_t: &Matrix, m_next: &Matrix) -> Result<Matrix> {
        self.check_batch(m_t, s_t, m_next)?;
        let h_t = self.encode(m_t)?;
        let h_next = self.encode(m_next)?;
        self.predictor.infer(&Matrix::hstack(&[&h_t, &h_next, s_t])?)
    }

    /// Loss on a batch and gradients of every parameter.
    ///
    /// Both encoder applications run as one stacked batch, so the encoder
    /// gradient is the sum of the two contributions.
    pub fn loss_and_grads(&self, batch: &Batch) -> Result<(f64, ModelGrads)> {
        self.check_batch(&batch.m_t, &batch.s_t, &batch.m_next)?;
        let b = batch.len();
        let dh = self.dim_h();
        let stacked = Matrix::vstack(&batch.m_t, &batch.m_next)?;
        let (h, enc_cache) = self.encoder.forward(&stacked)?;
        let h_t = h.slice_rows(0, b);
        let h_next = h.slice_rows(b, 2 * b);
        let input = Matrix::hstack(&[&h_t, &h_next, &batch.s_t])?;
        let (pred, pred_cache) = self.predictor.forward(&input)?;
        let (loss, grad) = mse_loss(&pred, &batch.s_next)?;
        let (pred_grads, d_input) = self.predictor.backward(&pred_cache, &grad)?;
        let d_h = Matrix::vstack(&d_input.slice_cols(0, dh), &d_input.slice_cols(dh, 2 * dh))?;
        let (enc_grads, _) = self.encoder.backward(&enc_cache, &d_h)?;
        Ok((loss, ModelGrads { encoder: enc_grads, predictor: pred_grads }))
    }

    pub fn loss(&self, batch: &Batch) -> Result<f64> {
        let pred = self.predict(&batch.m_t, &batch.s_t, &batch.m_next)?;
        Ok(mse_loss(&pred, &batch.s_next)?.0)
    }
}

/// Adam state for both networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOptimizer {
    pub encoder: AdamState,
    pub predictor: AdamState,
}

impl ModelOptimizer {
    pub fn new(model: &PredictiveModel) -> Self {
        Self {
            encoder: AdamState::new(model.encoder.tensors().map(<[f64]>::len)),
            predictor: AdamState::new(model.predictor.tensors().map(<[f64]>::len)),
        }
    }
}

/// One forward/backward pass and Adam update. Returns the pre-update batch loss.
pub fn train_step(model: &mut PredictiveModel, batch: &Batch, opt: &mut ModelOptimizer, lr: f64) -> Result<f64> {
    let (loss, grads) = model.loss_and_grads(batch)?;
    if !loss.is_finite() {
        return Err(Error::Diverged { epoch: opt.encoder.step_count + 1, loss });
    }
    opt.encoder.step(model.encoder.tensors_mut(), grads.encoder.tensors(), lr)?;
    opt.predictor.step(model.predictor.tensors_mut(), grads.predictor.tensors(), lr)?;
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub max_epochs: u64,
    pub loss_stop: f64,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub decay_epochs: u64,
    pub eval_every: u64,
    pub seed: u64,
    /// Abort when the batch loss exceeds this value.
    pub divergence_threshold: f64,
    /// Fill the curve's wall-time column; off by default so curves are reproducible byte for byte.
    pub record_wall_time: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 2_000_000,
            loss_stop: 1e-8,
            batch_size: DEFAULT_BATCH_SIZE,
            lr_start: 1e-3,
            lr_end: 1e-5,
            decay_epochs: 1_000_000,
            eval_every: 1_000,
            seed: 0,
            divergence_threshold: 1e6,
            record_wall_time: false,
        }
    }
}

impl TrainConfig {
    pub fn schedule(&self) -> LinearDecay {
        LinearDecay { start: self.lr_start, end: self.lr_end, decay_epochs: self.decay_epochs }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if self.max_epochs == 0 || self.batch_size == 0 || self.eval_every == 0 {
            return fail("max_epochs, batch_size and eval_every must be positive");
        }
        if !self.max_epochs.is_multiple_of(self.eval_every) {
            return fail("max_epochs must be a multiple of eval_every");
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end) {
            return fail("learning rates must satisfy lr_start ≥ lr_end > 0");
        }
        if !(self.loss_stop > 0.0 && self.divergence_threshold > 0.0) {
            return fail("loss_stop and divergence_threshold must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub epoch: u64,
    /// Mean mini-batch loss since the previous row.
    pub loss: f64,
    pub q_p: f64,
    pub q_h: f64,
    pub lr: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub rows: Vec<CurveRow>,
}

pub const CURVE_HEADER: &str = "epoch,loss,q_p,q_h,lr,wall_time_s";

impl LearningCurve {
    pub fn last(&self) -> Option<&CurveRow> {
        self.rows.last()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{},{}\n", r.epoch, r.loss, r.q_p, r.q_h, r.lr, r.wall_time_s));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(CURVE_HEADER) {
            return Err(Error::Config(format!("curve CSV must start with `{CURVE_HEADER}`")));
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            let parse = |i: usize| -> Result<f64> {
                f.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Config(format!("curve CSV line {}: bad field {i}", n + 2)))
            };
            rows.push(CurveRow {
                epoch: parse(0)? as u64,
                loss: parse(1)?,
                q_p: parse(2)?,
                q_h: parse(3)?,
                lr: parse(4)?,
                wall_time_s: parse(5)?,
            });
        }
        Ok(Self { rows })
    }
}

/// Everything needed to resume training exactly: both networks with their
/// optimizer state, the mini-batch stream, progress counters and the curve
/// so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingCheckpoint {
    pub version: u32,
    pub config: TrainConfig,
    pub encoder: NetworkCheckpoint,
    pub predictor: NetworkCheckpoint,
    pub epoch: u64,
    pub window_loss: f64,
    pub window_steps: u64,
    pub last_loss: f64,
    pub stopped_at: Option<u64>,
    pub curve: LearningCurve,
}

impl TrainingCheckpoint {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_slice(&std::fs::read(path)?)?;
        let version = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != TRAINING_CHECKPOINT_VERSION {
            return Err(Error::Version { found: version, expected: TRAINING_CHECKPOINT_VERSION });
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn model(&self) -> Result<PredictiveModel> {
        PredictiveModel::from_parts(self.encoder.to_mlp()?, self.predictor.to_mlp()?)
    }
}

/// Stateful training session. An epoch is one mini-batch update.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub config: TrainConfig,
    pub model: PredictiveModel,
    pub optimizer: ModelOptimizer,
    rng: Rng,
    epoch: u64,
    window_loss: f64,
    window_steps: u64,
    last_loss: f64,
    stopped_at: Option<u64>,
    curve: LearningCurve,
    elapsed: f64,
}

impl Trainer {
    pub fn new(model: PredictiveModel, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let optimizer = ModelOptimizer::new(&model);
        let rng = Rng::stream(config.seed, Stream::Minibatch);
        Ok(Self {
            config,
            model,
            optimizer,
            rng,
            epoch: 0,
            window_loss: 0.0,
            window_steps: 0,
            last_loss: f64::NAN,
            stopped_at: None,
            curve: LearningCurve::default(),
            elapsed: 0.0,
        })
    }

    pub fn from_checkpoint(ck: &TrainingCheckpoint) -> Result<Self> {
        ck.config.validate()?;
        let model = ck.model()?;
        let (Some(enc), Some(pred)) = (&ck.encoder.adam, &ck.predictor.adam) else {
            return Err(Error::Config("checkpoint lacks optimizer state".into()));
        };
        let Some(rng) = ck.encoder.rng.clone() else {
            return Err(Error::Config("checkpoint lacks the mini-batch stream".into()));
        };
        Ok(Self {
            config: ck.config.clone(),
            model,
            optimizer: ModelOptimizer { encoder: enc.clone(), predictor: pred.clone() },
            rng,
            epoch: ck.epoch,
            window_loss: ck.window_loss,
            window_steps: ck.window_steps,
            last_loss: ck.last_loss,
            stopped_at: ck.stopped_at,
            curve: ck.curve.clone(),
            elapsed: ck.curve.last().map_or(0.0, |r| r.wall_time_s),
        })
    }

    pub fn checkpoint(&self) -> TrainingCheckpoint {
        TrainingCheckpoint {
            version: TRAINING_CHECKPOINT_VERSION,
            config: self.config.clone(),
            encoder: NetworkCheckpoint::capture(
                &self.model.encoder,
                Some(&self.optimizer.encoder),
                self.epoch,
                Some(&self.rng),
            ),
            predictor: NetworkCheckpoint::capture(&self.model.predictor, Some(&self.optimizer.predictor), self.epoch, None),
            epoch: self.epoch,
            window_loss: self.window_loss,
            window_steps: self.window_steps,
            last_loss: self.last_loss,
            stopped_at: self.stopped_at,
            curve: self.curve.clone(),
        }
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn last_loss(&self) -> f64 {
        self.last_loss
    }

    pub fn stopped_at(&self) -> Option<u64> {
        self.stopped_at
    }

    pub fn curve(&self) -> &LearningCurve {
        &self.curve
    }

    pub fn is_finished(&self) -> bool {
        self.curve.last().is_some_and(|r| r.epoch >= self.config.max_epochs)
    }

    /// Runs one epoch; returns the batch loss.
    pub fn step(&mut self, data: &Dataset) -> Result<f64> {
        let batch = data.minibatch(&mut self.rng, self.config.batch_size)?;
        let lr = self.config.schedule().lr(self.epoch);
        let loss = train_step(&mut self.model, &batch, &mut self.optimizer, lr).map_err(|e| match e {
            Error::Diverged { loss, .. } => Error::Diverged { epoch: self.epoch + 1, loss },
            other => other,
        })?;
        if loss > self.config.divergence_threshold {
            return Err(Error::Diverged { epoch: self.epoch + 1, loss });
        }
        self.epoch += 1;
        self.window_loss += loss;
        self.window_steps += 1;
        self.last_loss = loss;
        if loss < self.config.loss_stop {
            self.stopped_at = Some(self.epoch);
        }
        Ok(loss)
    }

    fn snapshot_row(&mut self, grid: &EvalGrid, epoch: u64) -> Result<CurveRow> {
        let eval = analysis::evaluate(&self.model, grid)?;
        let loss = if self.window_steps > 0 { self.window_loss / self.window_steps as f64 } else { self.last_loss };
        self.window_loss = 0.0;
        self.window_steps = 0;
        Ok(CurveRow {
            epoch,
            loss,
            q_p: eval.report.q_p,
            q_h: eval.report.q_h,
            lr: self.config.schedule().lr(self.epoch.saturating_sub(1)),
            wall_time_s: if self.config.record_wall_time { self.elapsed } else { 0.0 },
        })
    }

    /// Trains until `max_epochs` or the loss threshold, recording a curve row
    /// every `eval_every` epochs and calling `on_snapshot` after each.
    ///
    /// After an early stop the network is frozen and the remaining rows
    /// repeat the last recorded values.
    pub fn run(
        &mut self,
        data: &Dataset,
        grid: &EvalGrid,
        mut on_snapshot: impl FnMut(&Trainer) -> Result<()>,
    ) -> Result<LearningCurve> {
        let every = self.config.eval_every;
        let max = self.config.max_epochs;
        while !self.is_finished() {
            if self.stopped_at.is_none() {
                let t0 = Instant::now();
                self.step(data)?;
                self.elapsed += t0.elapsed().as_secs_f64();
                if !self.epoch.is_multiple_of(every) && self.stopped_at.is_none() {
                    continue;
                }
                let row_epoch = self.epoch.div_ceil(every) * every;
                let row = self.snapshot_row(grid, row_epoch)?;
                self.curve.rows.push(row);
            } else {
                let mut last = *self.curve.last().expect("a row is recorded when training stops");
                while last.epoch < max {
                    last.epoch += every;
                    self.curve.rows.push(last);
                }
            }
            on_snapshot(self)?;
        }
        Ok(self.curve.clone())
    }
}

/// Builds a model for a dataset and trains it from scratch.
pub fn train(
    data: &Dataset,
    grid: &EvalGrid,
    dim_h: usize,
    hidden: Activation,
    config: TrainConfig,
) -> Result<(PredictiveModel, LearningCurve)> {
    let mut init = Rng::stream(config.seed, Stream::Init);
    let model = PredictiveModel::new(data.motor_dim(), data.sensory_dim(), dim_h, hidden, &mut init)?;
    let mut trainer = Trainer::new(model, config)?;
    let curve = trainer.run(data, grid, |_| Ok(()))?;
    Ok((trainer.model, curve))
}
