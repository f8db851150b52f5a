//! MLP-FL: a two-hidden-layer perceptron trained on coverage rows to predict
//! failure, queried with one-hot virtual tests to score statements.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{AdamW, AdamWConfig, Dense, Module, NnError, Param};
use crate::spectra::CoverageDataset;

#[derive(Debug, Error)]
pub enum DlflError {
    #[error("training data contains only one class")]
    SingleClassDataset,
    #[error("input width {got} does not match model width {expected}")]
    WidthMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpFlConfig {
    pub hidden: usize,
    /// Full-batch optimizer steps.
    pub steps: usize,
    pub optimizer: AdamWConfig,
}

impl Default for MlpFlConfig {
    fn default() -> Self {
        MlpFlConfig { hidden: 64, steps: 1000, optimizer: AdamWConfig { lr: 0.01, ..AdamWConfig::default() } }
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpFl {
    pub fc1: Dense,
    pub fc2: Dense,
    pub out: Dense,
}

struct Trace {
    h1: Vec<f64>,
    h2: Vec<f64>,
    logit: f64,
}

impl MlpFl {
    pub fn new<R: Rng + ?Sized>(width: usize, hidden: usize, rng: &mut R) -> Self {
        MlpFl {
            fc1: Dense::new("mlp.fc1", width, hidden, rng),
            fc2: Dense::new("mlp.fc2", hidden, hidden, rng),
            out: Dense::new("mlp.out", hidden, 1, rng),
        }
    }

    pub fn width(&self) -> usize {
        self.fc1.input
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let h1: Vec<f64> = self.fc1.forward(x).into_iter().map(sigmoid).collect();
        let h2: Vec<f64> = self.fc2.forward(&h1).into_iter().map(sigmoid).collect();
        let logit = self.out.forward(&h2)[0];
        Trace { h1, h2, logit }
    }

    /// Failure probability of a coverage row, strictly inside (0, 1).
    pub fn predict(&self, row: &[u8]) -> Result<f64, DlflError> {
        if row.len() != self.width() {
            return Err(DlflError::WidthMismatch { got: row.len(), expected: self.width() });
        }
        let x: Vec<f64> = row.iter().map(|&b| f64::from(b)).collect();
        Ok(sigmoid(self.trace(&x).logit))
    }

    fn backward(&mut self, x: &[f64], tr: &Trace, dlogit: f64) {
        let dh2 = self.out.backward(&tr.h2, &[dlogit]);
        let dz2: Vec<f64> = dh2.iter().zip(&tr.h2).map(|(g, h)| g * h * (1.0 - h)).collect();
        let dh1 = self.fc2.backward(&tr.h1, &dz2);
        let dz1: Vec<f64> = dh1.iter().zip(&tr.h1).map(|(g, h)| g * h * (1.0 - h)).collect();
        self.fc1.backward(x, &dz1);
    }

    /// Mean binary cross-entropy over the dataset.
    pub fn loss(&self, data: &CoverageDataset) -> f64 {
        let mut total = 0.0;
        for (row, &y) in data.matrix.iter().zip(&data.errors) {
            let x: Vec<f64> = row.iter().map(|&b| f64::from(b)).collect();
            let z = self.trace(&x).logit;
            // softplus(z) - y*z, stable for large |z|
            total += z.max(0.0) + (-z.abs()).exp().ln_1p() - f64::from(y) * z;
        }
        total / data.rows() as f64
    }
}

impl Module for MlpFl {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        self.fc1.visit(f);
        self.fc2.visit(f);
        self.out.visit(f);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        self.fc1.visit_mut(f);
        self.fc2.visit_mut(f);
        self.out.visit_mut(f);
    }
}

/// Trains with full-batch AdamW on binary cross-entropy. Returns the model
/// and the loss before each step.
pub fn train_mlpfl<R: Rng + ?Sized>(
    data: &CoverageDataset,
    cfg: &MlpFlConfig,
    rng: &mut R,
) -> Result<(MlpFl, Vec<f64>), DlflError> {
    let fail = data.failing();
    if fail == 0 || fail == data.rows() {
        return Err(DlflError::SingleClassDataset);
    }
    let mut model = MlpFl::new(data.cols(), cfg.hidden, rng);
    let mut opt = AdamW::new(cfg.optimizer);
    let rows: Vec<Vec<f64>> = data.matrix.iter().map(|r| r.iter().map(|&b| f64::from(b)).collect()).collect();
    let scale = 1.0 / rows.len() as f64;
    let mut losses = Vec::with_capacity(cfg.steps);
    for _ in 0..cfg.steps {
        model.zero_grad();
        let mut loss = 0.0;
        for (x, &y) in rows.iter().zip(&data.errors) {
            let tr = model.trace(x);
            let z = tr.logit;
            loss += (z.max(0.0) + (-z.abs()).exp().ln_1p() - f64::from(y) * z) * scale;
            model.backward(x, &tr, (sigmoid(z) - f64::from(y)) * scale);
        }
        losses.push(loss);
        opt.step(&mut model)?;
    }
    Ok((model, losses))
}

/// Score of statement j = predicted failure probability of the virtual test
/// covering only statement j.
pub fn virtual_suspiciousness(model: &MlpFl) -> Vec<f64> {
    let n = model.width();
    (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            sigmoid(model.trace(&e).logit)
        })
        .collect()
}
