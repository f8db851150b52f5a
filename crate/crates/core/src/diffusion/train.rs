use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DiffusionError, NoisePredictor, NoiseSchedule};
use crate::nn::{AdamW, AdamWConfig, Class, Denoiser, Module};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub p_uncond: f64,
    /// Epochs without a new best epoch loss before stopping; 0 disables.
    pub patience: usize,
    pub optimizer: AdamWConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 400, batch_size: 32, p_uncond: 0.1, patience: 50, optimizer: AdamWConfig::default() }
    }
}

/// One noised training input.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDraw {
    pub t: usize,
    pub eps: Vec<f64>,
    pub x_t: Vec<f64>,
    pub class: Class,
}

/// Draws `t ~ U{1..T}`, `ε ~ N(0, I)` and label dropout for every row.
pub fn draw_training_inputs<R: Rng + ?Sized>(
    batch: &[(Vec<f64>, Class)],
    sched: &NoiseSchedule,
    p_uncond: f64,
    rng: &mut R,
) -> Vec<TrainingDraw> {
    batch
        .iter()
        .map(|(x0, class)| {
            let t = rng.random_range(1..=sched.steps);
            let eps: Vec<f64> = (0..x0.len()).map(|_| rng.sample(StandardNormal)).collect();
            let (a, s) = (sched.alpha_bar[t].sqrt(), (1.0 - sched.alpha_bar[t]).sqrt());
            let x_t = x0.iter().zip(&eps).map(|(x, e)| a * x + s * e).collect();
            let class = if rng.random::<f64>() < p_uncond { Class::Null } else { *class };
            TrainingDraw { t, eps, x_t, class }
        })
        .collect()
}

/// Mean over the batch of `‖ε − ε_θ(x_t, t, c)‖²`, without updating anything.
pub fn batch_loss<P: NoisePredictor + ?Sized, R: Rng + ?Sized>(
    model: &P,
    batch: &[(Vec<f64>, Class)],
    sched: &NoiseSchedule,
    p_uncond: f64,
    rng: &mut R,
) -> Result<f64, DiffusionError> {
    if batch.is_empty() {
        return Err(DiffusionError::EmptyBatch);
    }
    let mut total = 0.0;
    for d in draw_training_inputs(batch, sched, p_uncond, rng) {
        let pred = model.predict(&d.x_t, d.t as f64, d.class)?;
        total += pred.iter().zip(&d.eps).map(|(p, e)| (p - e) * (p - e)).sum::<f64>();
    }
    Ok(total / batch.len() as f64)
}

/// One AdamW step on the batch's noise-prediction loss. Returns the loss and
/// the draws used.
pub fn train_step<R: Rng + ?Sized>(
    model: &mut Denoiser,
    opt: &mut AdamW,
    batch: &[(Vec<f64>, Class)],
    sched: &NoiseSchedule,
    p_uncond: f64,
    rng: &mut R,
) -> Result<(f64, Vec<TrainingDraw>), DiffusionError> {
    if batch.is_empty() {
        return Err(DiffusionError::EmptyBatch);
    }
    let scale = 1.0 / batch.len() as f64;
    let draws = draw_training_inputs(batch, sched, p_uncond, rng);
    model.zero_grad();
    let mut loss = 0.0;
    for d in &draws {
        let (pred, cache) = model.forward(&d.x_t, d.t as f64, d.class)?;
        let diff: Vec<f64> = pred.iter().zip(&d.eps).map(|(p, e)| p - e).collect();
        loss += diff.iter().map(|v| v * v).sum::<f64>() * scale;
        let dy: Vec<f64> = diff.iter().map(|v| 2.0 * v * scale).collect();
        model.backward(&cache, &dy);
    }
    opt.step(model)?;
    Ok((loss, draws))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean batch loss per epoch.
    pub epoch_losses: Vec<f64>,
    /// Loss of every optimizer step, in order.
    pub step_losses: Vec<f64>,
    pub stopped_early: bool,
}

/// Trains on shuffled minibatches for up to `cfg.epochs` epochs.
pub fn train<R: Rng + ?Sized>(
    model: &mut Denoiser,
    data: &[(Vec<f64>, Class)],
    sched: &NoiseSchedule,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<TrainReport, DiffusionError> {
    if data.is_empty() || cfg.batch_size == 0 {
        return Err(DiffusionError::EmptyBatch);
    }
    let mut opt = AdamW::new(cfg.optimizer);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut report = TrainReport { epoch_losses: Vec::new(), step_losses: Vec::new(), stopped_early: false };
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        let mut sum = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(Vec<f64>, Class)> = chunk.iter().map(|&i| data[i].clone()).collect();
            let (loss, _) = train_step(model, &mut opt, &batch, sched, cfg.p_uncond, rng)?;
            report.step_losses.push(loss);
            sum += loss;
            batches += 1;
        }
        let epoch = sum / batches as f64;
        report.epoch_losses.push(epoch);
        if epoch < best {
            best = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience > 0 && since_best >= cfg.patience {
                report.stopped_early = true;
                break;
            }
        }
    }
    Ok(report)
}
