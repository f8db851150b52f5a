//! Hand-differentiated layers for a small 1-D denoiser: dense and
//! convolution layers, group normalization, self-attention, residual blocks,
//! time/class embeddings, AdamW, gradient checking and checkpoints.
//!
//! Activations are per-sample [`Tensor1D`]s in f64; a batch is processed by
//! running forward/backward per row and letting parameter gradients
//! accumulate.

mod blocks;
mod checkpoint;
mod denoiser;
mod gradcheck;
mod layers;
mod optim;

use rand::Rng;
use thiserror::Error;

pub use blocks::{timestep_embedding, AttentionBlock, Embedding, ResBlock};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
pub use denoiser::{Class, Denoiser, DenoiserConfig};
pub use gradcheck::{grad_check, grad_check_module, relative_error};
pub use layers::{silu, silu_backward, Conv1d, Dense, GroupNorm};
pub use optim::{AdamW, AdamWConfig};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite gradient in `{0}`")]
    NonFiniteGradient(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Channel-major activation of one sample: `data[c * width + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor1D {
    pub channels: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Tensor1D {
    pub fn zeros(channels: usize, width: usize) -> Self {
        Tensor1D { channels, width, data: vec![0.0; channels * width] }
    }

    pub fn from_row(row: &[f64]) -> Self {
        Tensor1D { channels: 1, width: row.len(), data: row.to_vec() }
    }

    pub fn at(&self, c: usize, i: usize) -> f64 {
        self.data[c * self.width + i]
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * self.width..(c + 1) * self.width]
    }

    pub fn same_shape(&self, other: &Tensor1D) -> bool {
        self.channels == other.channels && self.width == other.width
    }

    pub fn add_assign(&mut self, other: &Tensor1D) {
        debug_assert!(self.same_shape(other));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor1D {
        Tensor1D { channels: self.channels, width: self.width, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

/// A named parameter array with its gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub shape: Vec<usize>,
    pub value: Vec<f64>,
    pub grad: Vec<f64>,
}

impl Param {
    pub fn zeros(name: impl Into<String>, shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Param { name: name.into(), shape: shape.to_vec(), value: vec![0.0; len], grad: vec![0.0; len] }
    }

    pub fn filled(name: impl Into<String>, shape: &[usize], v: f64) -> Self {
        let mut p = Param::zeros(name, shape);
        p.value.fill(v);
        p
    }

    /// Uniform in `±1/sqrt(fan_in)`.
    pub fn fan_in<R: Rng + ?Sized>(name: impl Into<String>, shape: &[usize], fan_in: usize, rng: &mut R) -> Self {
        let mut p = Param::zeros(name, shape);
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        for v in &mut p.value {
            *v = rng.random_range(-bound..bound);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

/// Anything owning parameters. Visiting order is fixed and defines the
/// checkpoint layout and optimizer state alignment.
pub trait Module {
    fn visit(&self, f: &mut dyn FnMut(&Param));
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param));

    fn zero_grad(&mut self) {
        self.visit_mut(&mut |p| p.grad.fill(0.0));
    }

    fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |p| n += p.len());
        n
    }
}
