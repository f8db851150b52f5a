//! Gaussian diffusion over K-wide rows: linear noise schedule, closed-form
//! forward noising, classifier-free training, guided noise prediction, and
//! two samplers (ancestral and DPM-Solver).

mod sample;
mod schedule;
mod train;

use thiserror::Error;

pub use sample::{
    ancestral_from, ancestral_sample, dpm_solve, dpm_solve_from, guided_eps, DpmOptions, Spacing,
};
pub use schedule::{make_schedule, q_sample, NoiseSchedule};
pub use train::{
    batch_loss, draw_training_inputs, train, train_step, TrainConfig, TrainReport, TrainingDraw,
};

use crate::nn::{Class, Denoiser, NnError};

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("invalid schedule range: {0}")]
    InvalidRange(String),
    #[error("timestep {t} outside 1..={max}")]
    TimestepOutOfRange { t: usize, max: usize },
    #[error("empty training batch")]
    EmptyBatch,
    #[error("solver order {0} not supported (use 1 or 2)")]
    InvalidOrder(usize),
    #[error("invalid sampler option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Anything that predicts the noise in `x` at (continuous) time `t`.
pub trait NoisePredictor {
    fn width(&self) -> usize;
    fn predict(&self, x: &[f64], t: f64, class: Class) -> Result<Vec<f64>, NnError>;
}

impl NoisePredictor for Denoiser {
    fn width(&self) -> usize {
        Denoiser::width(self)
    }
    fn predict(&self, x: &[f64], t: f64, class: Class) -> Result<Vec<f64>, NnError> {
        Denoiser::predict(self, x, t, class)
    }
}

/// Wraps a closure as a predictor, for analytic test models.
pub struct FnPredictor<F> {
    pub width: usize,
    pub f: F,
}

impl<F: Fn(&[f64], f64, Class) -> Vec<f64>> NoisePredictor for FnPredictor<F> {
    fn width(&self) -> usize {
        self.width
    }
    fn predict(&self, x: &[f64], t: f64, class: Class) -> Result<Vec<f64>, NnError> {
        Ok((self.f)(x, t, class))
    }
}

/// `{0,1}` coverage bit to the model's `{-1,+1}` encoding.
pub fn encode_bits(row: &[u8]) -> Vec<f64> {
    row.iter().map(|&b| if b == 0 { -1.0 } else { 1.0 }).collect()
}
