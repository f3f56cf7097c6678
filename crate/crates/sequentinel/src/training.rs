//! Loss functions, the Adam optimizer, and the mini-batch training loop.
//!
//! The batch gradient is the mean over sequences, so the learning rate is
//! decoupled from the batch size. A global-norm clip guards against the
//! gradient spikes long recurrences can produce. Per-sequence passes within
//! a batch run in parallel, but gradients reduce in batch order, so training
//! is bit-deterministic for a given seed regardless of thread count.

use crate::data::LabeledSequence;
use crate::error::{Error, Result};
use crate::eval;
use crate::models::{self, ForwardOutput, ModelOutput, ModelParams, SequenceModel};
use crate::rng::{self, Domain};
use crate::tensor::{Tape, Tensor, Var};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use std::time::Instant;

// ── losses ──────────────────────────────────────────────────────────────

/// `-[t ln p + (1 - t) ln(1 - p)]` with `p` clamped to `[1e-12, 1 - 1e-12]`.
pub fn binary_cross_entropy(p: f64, target: bool) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    let t = if target { 1.0 } else { 0.0 };
    -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
}

/// `-ln softmax(logits)[target]`, computed with max subtraction.
pub fn categorical_cross_entropy(logits: &[f64], target: usize) -> Result<f64> {
    if target >= logits.len() {
        return Err(Error::Vocab(format!(
            "target id {target} out of range for {} classes",
            logits.len()
        )));
    }
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|&x| (x - m).exp()).sum::<f64>().ln();
    Ok(lse - logits[target])
}

/// Value-level total loss: classification loss plus, for models with an
/// auxiliary head, `aux_weight` times the mean next-event cross-entropy.
pub fn total_loss(
    output: &ModelOutput,
    events: &[u32],
    target: bool,
    aux_weight: f64,
) -> Result<f64> {
    let mut loss = binary_cross_entropy(output.p_m, target);
    if aux_weight != 0.0 {
        if let Some(logits) = &output.aux_logits {
            let rows = logits.shape()[0];
            let v = logits.shape()[1];
            if events.len() < rows + 1 {
                return Err(Error::contract(format!(
                    "total_loss: {rows} auxiliary rows but only {} events",
                    events.len()
                )));
            }
            let mut aux = 0.0;
            for r in 0..rows {
                let row = &logits.data()[r * v..(r + 1) * v];
                aux += categorical_cross_entropy(row, events[r + 1] as usize)?;
            }
            loss += aux_weight * aux / rows as f64;
        }
    }
    Ok(loss)
}

/// Tape-level counterpart of [`total_loss`], used to drive backward passes.
pub fn tape_total_loss(
    tape: &mut Tape,
    out: &ForwardOutput,
    target: bool,
    aux_weight: f64,
) -> Result<Var> {
    let bce = tape.bce_loss(out.p_m, if target { 1.0 } else { 0.0 })?;
    match (&out.aux_logits, &out.aux_targets) {
        (Some(logits), Some(targets)) if aux_weight != 0.0 => {
            let aux = tape.cross_entropy_mean_rows(*logits, targets)?;
            let scaled = tape.scale(aux, aux_weight);
            tape.add(bce, scaled)
        }
        _ => Ok(bce),
    }
}

// ── Adam ────────────────────────────────────────────────────────────────

/// Adam with bias correction; moment buffers are allocated on first use.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one update to every parameter in place.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Vec<f64>]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::contract(format!(
                "adam: {} parameters but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| vec![0.0; g.len()]).collect();
            self.v = self.m.clone();
        }
        for ((p, g), (m, v)) in params
            .iter()
            .zip(grads)
            .zip(self.m.iter().zip(self.v.iter()))
        {
            if p.numel() != g.len() || g.len() != m.len() || g.len() != v.len() {
                return Err(Error::shape("adam", p.shape(), &[g.len()]));
            }
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let data = p.data_mut();
            for j in 0..g.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                data[j] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

// ── training loop ───────────────────────────────────────────────────────

/// Knobs of one training run; the seed comes from the model config.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Weight of the auxiliary next-event loss (AoLL only).
    pub aux_weight: f64,
    /// Global-norm gradient clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            batch_size: 64,
            learning_rate: 1e-3,
            aux_weight: 1.0,
            clip_norm: Some(5.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub batches: usize,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

/// Per-epoch metrics plus details of the retained checkpoint.
#[derive(Clone, Debug)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub aux_weight: f64,
    /// Epoch whose parameters were retained (lowest validation loss),
    /// or `None` when no validation data was given.
    pub best_epoch: Option<usize>,
    /// Accuracy of the retained parameters on the training split.
    pub train_accuracy: f64,
    pub wall_time_secs: f64,
}

/// One forward/backward pass; returns the loss and per-parameter gradients
/// in canonical order (exactly zero for parameters the loss never reached).
fn sequence_pass(
    model: &SequenceModel,
    seq: &LabeledSequence,
    aux_weight: f64,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let mut tape = Tape::new();
    let bound = model.params.bind(&model.cfg, &mut tape)?;
    let out = models::forward(&mut tape, &model.cfg, &bound.model, &seq.events)?;
    let loss = tape_total_loss(&mut tape, &out, seq.label, aux_weight)?;
    let loss_value = tape.value(loss)[0];
    tape.backward(loss)?;
    let grads = bound
        .vars
        .iter()
        .zip(model.params.tensors())
        .map(|(&v, t)| {
            tape.grad(v)
                .map(|g| g.to_vec())
                .unwrap_or_else(|| vec![0.0; t.numel()])
        })
        .collect();
    Ok((loss_value, grads))
}

fn validation_pass(model: &SequenceModel, seq: &LabeledSequence, aux_weight: f64) -> Result<(f64, bool)> {
    let output = model.predict(&seq.events)?;
    let loss = total_loss(&output, &seq.events, seq.label, aux_weight)?;
    let correct = (output.p_m >= 0.5) == seq.label;
    Ok((loss, correct))
}

/// Trains in place: seeded shuffle per epoch, mean batch gradients,
/// validation with frozen parameters after each epoch, best-validation
/// parameters retained.
pub fn train(
    model: &mut SequenceModel,
    tc: &TrainConfig,
    train_set: &[LabeledSequence],
    val_set: &[LabeledSequence],
) -> Result<TrainReport> {
    if train_set.is_empty() {
        return Err(Error::contract("train: empty training set"));
    }
    if tc.batch_size == 0 {
        return Err(Error::Config("batch_size must be at least 1".into()));
    }
    let started = Instant::now();
    let mut shuffle_rng = rng::stream(model.cfg.seed, Domain::Shuffle);
    let mut adam = Adam::new(tc.learning_rate);
    let mut epochs = Vec::with_capacity(tc.epochs);
    let mut best: Option<(f64, usize, ModelParams)> = None;

    for epoch in 1..=tc.epochs {
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut shuffle_rng);

        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for (batch_idx, batch) in order.chunks(tc.batch_size).enumerate() {
            let passes: Vec<Result<(f64, Vec<Vec<f64>>)>> = batch
                .par_iter()
                .map(|&i| sequence_pass(model, &train_set[i], tc.aux_weight))
                .collect();

            let mut acc: Option<Vec<Vec<f64>>> = None;
            let mut batch_loss = 0.0;
            for pass in passes {
                let (loss, grads) = pass?;
                batch_loss += loss;
                match &mut acc {
                    None => acc = Some(grads),
                    Some(acc) => {
                        for (a, g) in acc.iter_mut().zip(&grads) {
                            for (x, y) in a.iter_mut().zip(g) {
                                *x += y;
                            }
                        }
                    }
                }
            }
            let mut grads = acc.expect("non-empty batch");
            let scale = 1.0 / batch.len() as f64;
            batch_loss *= scale;
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: batch_idx,
                });
            }
            for g in &mut grads {
                for x in g.iter_mut() {
                    *x *= scale;
                }
            }
            if let Some(clip) = tc.clip_norm {
                clip_global_norm(&mut grads, clip);
            }
            adam.step(&mut model.params.tensors_mut(), &grads)?;
            epoch_loss += batch_loss * batch.len() as f64;
            batches += 1;
        }
        let train_loss = epoch_loss / train_set.len() as f64;

        let (val_loss, val_accuracy) = if val_set.is_empty() {
            (None, None)
        } else {
            let passes: Vec<Result<(f64, bool)>> = val_set
                .par_iter()
                .map(|seq| validation_pass(model, seq, tc.aux_weight))
                .collect();
            let mut loss_sum = 0.0;
            let mut correct = 0usize;
            for pass in passes {
                let (loss, ok) = pass?;
                loss_sum += loss;
                correct += ok as usize;
            }
            let val_loss = loss_sum / val_set.len() as f64;
            if best.as_ref().map_or(true, |(b, _, _)| val_loss < *b) {
                best = Some((val_loss, epoch, model.params.clone()));
            }
            (
                Some(val_loss),
                Some(correct as f64 / val_set.len() as f64),
            )
        };

        epochs.push(EpochStats {
            epoch,
            train_loss,
            batches,
            val_loss,
            val_accuracy,
        });
    }

    let best_epoch = match best {
        Some((_, epoch, params)) => {
            model.params = params;
            Some(epoch)
        }
        None => None,
    };

    let scored = eval::score_set(model, train_set)?;
    let train_accuracy = eval::accuracy(&scored, 0.5)?;

    Ok(TrainReport {
        epochs,
        aux_weight: tc.aux_weight,
        best_epoch,
        train_accuracy,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

fn clip_global_norm(grads: &mut [Vec<f64>], clip: f64) {
    let norm: f64 = grads
        .iter()
        .flat_map(|g| g.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    if norm > clip {
        let scale = clip / norm;
        for g in grads.iter_mut() {
            for x in g.iter_mut() {
                *x *= scale;
            }
        }
    }
}

// ── metrics file ────────────────────────────────────────────────────────

/// Writes the report as line-delimited `epoch TAB split TAB metric TAB value`
/// records. Epoch 0 carries run-level rows (`config` and `checkpoint`);
/// wall time is deliberately not written, so reruns with the same seed
/// produce byte-identical files.
pub fn write_metrics(path: &std::path::Path, report: &TrainReport) -> Result<()> {
    let mut out = String::from("epoch\tsplit\tmetric\tvalue\n");
    out.push_str(&format!("0\tconfig\taux_weight\t{}\n", report.aux_weight));
    for e in &report.epochs {
        out.push_str(&format!("{}\ttrain\tloss\t{}\n", e.epoch, e.train_loss));
        if let Some(v) = e.val_loss {
            out.push_str(&format!("{}\tvalidation\tloss\t{}\n", e.epoch, v));
        }
        if let Some(v) = e.val_accuracy {
            out.push_str(&format!("{}\tvalidation\taccuracy\t{}\n", e.epoch, v));
        }
    }
    if let Some(b) = report.best_epoch {
        out.push_str(&format!("0\tcheckpoint\tbest_epoch\t{b}\n"));
    }
    out.push_str(&format!(
        "0\tcheckpoint\ttrain_accuracy\t{}\n",
        report.train_accuracy
    ));
    std::fs::write(path, out)?;
    Ok(())
}
